//! End-to-end clearing runs on the worked two-provider scenario, with
//! expected allocations and welfare derived by hand from the admission and
//! ordering rules.

use allocation::{
    bid_map, check_constraints, find_instance_allocation, offer_map, social_welfare,
};
use market_core::{
    Bid, Money, Offer, PriceCurve, ProviderId, Slot, SupplySchedule, UserId, Window,
};

fn user(id: u32, demand: u32, length: u32, window: (Slot, Slot), dollars: i64) -> Bid {
    Bid {
        user: UserId(id),
        demand: vec![demand],
        length,
        window: Window::new(window.0, window.1),
        valuation: Money(dollars * 100),
        arrival: 0,
    }
}

fn provider(id: u32, first_cents: i64, disc_cents: i64, disc_from: u32) -> Offer {
    Offer {
        provider: ProviderId(id),
        supply: vec![20],
        window: Window::new(0, 8),
        curves: vec![
            PriceCurve::from_steps(&[(Money(first_cents), 1), (Money(disc_cents), disc_from)], 20)
                .unwrap(),
        ],
    }
}

/// The eight bids of the showcase market.
fn all_users() -> Vec<Bid> {
    vec![
        user(1, 2, 4, (0, 6), 8),
        user(2, 2, 5, (0, 6), 10),
        user(3, 2, 6, (0, 6), 20),
        user(4, 2, 4, (1, 8), 10),
        user(5, 5, 5, (1, 8), 20),
        user(6, 5, 6, (1, 8), 30),
        user(7, 10, 4, (0, 8), 40),
        user(8, 10, 6, (0, 8), 60),
    ]
}

fn providers() -> (Offer, Offer) {
    (provider(1, 50, 40, 15), provider(2, 60, 30, 15))
}

fn pick<'a>(bids: &'a [Bid], ids: &[u32]) -> Vec<&'a Bid> {
    ids.iter()
        .map(|&id| bids.iter().find(|b| b.user == UserId(id)).unwrap())
        .collect()
}

#[test]
fn group_on_provider_one_serves_three_users_for_sixty_dollars() {
    let bids = all_users();
    let (p1, _) = providers();
    let group = pick(&bids, &[3, 5, 8]);
    let offers = vec![&p1];
    let supply = SupplySchedule::new();

    let alloc = find_instance_allocation(1, &group, &offers, &supply, 0);

    // u8 and u3 run slots 1..=6, u5 runs 2..=6; everything on p1
    for (id, slots) in [(3u32, 1..=6u32), (8, 1..=6)] {
        let got: Vec<Slot> = alloc.slots_of(UserId(id)).unwrap().keys().copied().collect();
        assert_eq!(got, slots.collect::<Vec<_>>(), "user {id}");
    }
    let got5: Vec<Slot> = alloc.slots_of(UserId(5)).unwrap().keys().copied().collect();
    assert_eq!(got5, vec![2, 3, 4, 5, 6]);
    assert!(alloc
        .iter()
        .all(|(_, slots)| slots.values().all(|&p| p == ProviderId(1))));

    let bm = bid_map(group.iter().copied());
    let om = offer_map(offers.iter().copied());
    assert_eq!(social_welfare(1, &bm, &om, &alloc), Money(6000));
    assert!(check_constraints(1, &bm, &om, &supply, 0, &alloc).is_empty());
}

#[test]
fn group_on_provider_two_serves_four_users_for_fifty_eight_dollars() {
    let bids = all_users();
    let (_, p2) = providers();
    let group = pick(&bids, &[1, 2, 6, 7]);
    let offers = vec![&p2];
    let supply = SupplySchedule::new();

    let alloc = find_instance_allocation(1, &group, &offers, &supply, 0);

    let expect: &[(u32, &[Slot])] = &[
        (1, &[2, 3, 4, 5]),
        (2, &[2, 3, 4, 5, 6]),
        (6, &[2, 3, 4, 5, 6, 7]),
        (7, &[2, 3, 4, 5]),
    ];
    for &(id, slots) in expect {
        let got: Vec<Slot> = alloc.slots_of(UserId(id)).unwrap().keys().copied().collect();
        assert_eq!(got, slots, "user {id}");
    }

    let bm = bid_map(group.iter().copied());
    let om = offer_map(offers.iter().copied());
    assert_eq!(social_welfare(1, &bm, &om, &alloc), Money(5800));
    assert!(check_constraints(1, &bm, &om, &supply, 0, &alloc).is_empty());
}

#[test]
fn whole_market_as_one_group_clears_everyone() {
    let bids = all_users();
    let (p1, p2) = providers();
    let group: Vec<&Bid> = bids.iter().collect();
    let offers = vec![&p1, &p2];
    let supply = SupplySchedule::new();

    let alloc = find_instance_allocation(1, &group, &offers, &supply, 0);

    assert_eq!(alloc.winner_count(), 8);
    let bm = bid_map(group.iter().copied());
    let om = offer_map(offers.iter().copied());
    // contention splits the heavy users onto p2's deeper discount and
    // everyone else onto p1; total value $198.00 less $69.30 of cost
    assert_eq!(social_welfare(1, &bm, &om, &alloc), Money(12870));
    assert!(check_constraints(1, &bm, &om, &supply, 0, &alloc).is_empty());
    assert_eq!(alloc.bid_closing_time(), Some(1));
}

#[test]
fn the_low_value_user_rides_along_in_the_p1_group() {
    // u4's two units still fit under p1's cap (19 of 20), its bundle cost
    // stays covered, and its presence deepens the discount for everyone,
    // so the group of four clears whole
    let bids = all_users();
    let (p1, _) = providers();
    let group = pick(&bids, &[3, 4, 5, 8]);
    let offers = vec![&p1];
    let supply = SupplySchedule::new();

    let alloc = find_instance_allocation(1, &group, &offers, &supply, 0);

    assert_eq!(alloc.winner_count(), 4);
    let got4: Vec<Slot> = alloc.slots_of(UserId(4)).unwrap().keys().copied().collect();
    assert_eq!(got4, vec![2, 3, 4, 5]);
    // u4 widens the slot-7 window's contention, pushing slot 1 to the back
    // of the processing order; u8 now runs 2..=7 and u3 picks up slot 1 last
    let got8: Vec<Slot> = alloc.slots_of(UserId(8)).unwrap().keys().copied().collect();
    assert_eq!(got8, vec![2, 3, 4, 5, 6, 7]);
    let bm = bid_map(group.iter().copied());
    let om = offer_map(offers.iter().copied());
    assert_eq!(social_welfare(1, &bm, &om, &alloc), Money(6680));
    assert!(check_constraints(1, &bm, &om, &supply, 0, &alloc).is_empty());
}

#[test]
fn floor_restricts_service_to_future_slots() {
    let bids = all_users();
    let (p1, p2) = providers();
    let group: Vec<&Bid> = bids.iter().collect();
    let offers = vec![&p1, &p2];
    let supply = SupplySchedule::new();

    let alloc = find_instance_allocation(1, &group, &offers, &supply, 4);

    let bm = bid_map(group.iter().copied());
    let om = offer_map(offers.iter().copied());
    assert!(check_constraints(1, &bm, &om, &supply, 4, &alloc).is_empty());
    for (user, slots) in alloc.iter() {
        assert!(slots.keys().all(|&s| s > 4), "{user} served in the past");
    }
    // nobody with a long request fits in the shrunken windows
    assert!(!alloc.is_winner(UserId(3)));
    assert!(!alloc.is_winner(UserId(8)));
}

#[test]
fn consumed_capacity_is_respected() {
    let bids = all_users();
    let (p1, p2) = providers();
    let group: Vec<&Bid> = bids.iter().collect();
    let offers = vec![&p1, &p2];
    let mut supply = SupplySchedule::new();
    // sell out p2 entirely and halve p1 for slots 1..=8
    for slot in 1..=8 {
        supply.consume(ProviderId(2), slot, &[20]);
        supply.consume(ProviderId(1), slot, &[10]);
    }

    let alloc = find_instance_allocation(1, &group, &offers, &supply, 0);
    let bm = bid_map(group.iter().copied());
    let om = offer_map(offers.iter().copied());
    assert!(check_constraints(1, &bm, &om, &supply, 0, &alloc).is_empty());
    for (_, slots) in alloc.iter() {
        assert!(slots.values().all(|&p| p == ProviderId(1)));
    }
}

#[test]
fn empty_inputs_produce_empty_allocations() {
    let bids = all_users();
    let (p1, _) = providers();
    let supply = SupplySchedule::new();
    let none: Vec<&Bid> = vec![];
    assert!(find_instance_allocation(1, &none, &[&p1], &supply, 0).is_empty());
    let group: Vec<&Bid> = bids.iter().collect();
    assert!(find_instance_allocation(1, &group, &[], &supply, 0).is_empty());
}
