//! Exact prices, charges, and settlements for the two showcase groups.

use allocation::{bid_map, find_instance_allocation, offer_map, social_welfare};
use market_core::{Bid, Money, Offer, PriceCurve, ProviderId, Rat, Slot, UserId, Window};
use pricing::{price_allocation, provider_utility, settle, user_utility, verify_settlement};

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

fn half() -> Rat {
    Rat::new(1, 2)
}

#[test]
fn p1_group_prices_and_settlement() {
    let bids = vec![
        user(3, 2, 6, (0, 6), 20),
        user(5, 5, 5, (1, 8), 20),
        user(8, 10, 6, (0, 8), 60),
    ];
    let offer = Offer {
        provider: ProviderId(1),
        supply: vec![20],
        window: Window::new(0, 8),
        curves: vec![
            PriceCurve::from_steps(&[(Money(50), 1), (Money(40), 15)], 20).unwrap(),
        ],
    };
    let refs: Vec<&Bid> = bids.iter().collect();
    let alloc = find_instance_allocation(1, &refs, &[&offer], &Default::default(), 0);
    let bm = bid_map(refs.iter().copied());
    let om = offer_map([&offer]);
    let sheet = price_allocation(1, &bm, &om, &alloc, half());

    // slot 1 serves u3+u8 at cost 600; slots 2..=6 serve all three at 680
    assert_eq!(sheet.group_prices[&1], Rat::new(2900, 3));
    for s in 2..=6 {
        assert_eq!(sheet.group_prices[&s], Rat::new(3620, 3));
    }
    assert_eq!(sheet.user_charge(UserId(3)), Rat::new(18225, 13));
    assert_eq!(sheet.user_charge(UserId(5)), Rat::new(18100, 13));
    assert_eq!(sheet.user_charge(UserId(8)), Rat::new(54675, 13));
    assert_eq!(sheet.total(), Rat::from_integer(7000));

    // rational budget balance and the welfare identity
    assert_eq!(sheet.provider_revenue(ProviderId(1)), Rat::from_integer(7000));
    let welfare = social_welfare(1, &bm, &om, &alloc);
    assert_eq!(welfare, Money(6000));
    let split: Rat = bids
        .iter()
        .map(|b| user_utility(b.user, &bm, &alloc, &sheet))
        .sum::<Rat>()
        + provider_utility(ProviderId(1), &sheet);
    assert_eq!(split, welfare.to_rat());

    let settlement = settle(&sheet, &bm, &alloc);
    assert!(verify_settlement(&settlement, &bm).is_empty());
    assert_eq!(settlement.user_payments[&UserId(3)], Money(1401));
    assert_eq!(settlement.user_payments[&UserId(5)], Money(1390));
    assert_eq!(settlement.user_payments[&UserId(8)], Money(4205));
    assert_eq!(settlement.total_revenue(), Money(6996));
    assert_eq!(settlement.dropped_cents, 0);
}

#[test]
fn p2_group_prices_are_whole_cents() {
    let bids = vec![
        user(1, 2, 4, (0, 6), 8),
        user(2, 2, 5, (0, 6), 10),
        user(6, 5, 6, (1, 8), 30),
        user(7, 10, 4, (0, 8), 40),
    ];
    let offer = Offer {
        provider: ProviderId(2),
        supply: vec![20],
        window: Window::new(0, 8),
        curves: vec![
            PriceCurve::from_steps(&[(Money(60), 1), (Money(30), 15)], 20).unwrap(),
        ],
    };
    let refs: Vec<&Bid> = bids.iter().collect();
    let alloc = find_instance_allocation(1, &refs, &[&offer], &Default::default(), 0);
    let bm = bid_map(refs.iter().copied());
    let om = offer_map([&offer]);
    let sheet = price_allocation(1, &bm, &om, &alloc, half());

    for s in 2..=5 {
        assert_eq!(sheet.group_prices[&s], Rat::from_integer(1235));
    }
    assert_eq!(sheet.group_prices[&6], Rat::from_integer(560));
    assert_eq!(sheet.group_prices[&7], Rat::from_integer(400));

    // integral shares settle without any rounding motion
    let settlement = settle(&sheet, &bm, &alloc);
    assert!(verify_settlement(&settlement, &bm).is_empty());
    assert_eq!(settlement.user_payments[&UserId(1)], Money(520));
    assert_eq!(settlement.user_payments[&UserId(2)], Money(680));
    assert_eq!(settlement.user_payments[&UserId(6)], Money(2100));
    assert_eq!(settlement.user_payments[&UserId(7)], Money(2600));
    assert_eq!(settlement.provider_revenue[&ProviderId(2)], Money(5900));
    assert_eq!(settlement.dropped_cents, 0);

    assert_eq!(
        provider_utility(ProviderId(2), &sheet),
        Rat::from_integer(2900)
    );
    assert_eq!(
        user_utility(UserId(7), &bm, &alloc, &sheet),
        Rat::from_integer(1400)
    );
}

#[test]
fn kappa_extremes_hand_the_surplus_to_one_side() {
    let bids = vec![user(1, 4, 2, (0, 3), 10)];
    let offer = Offer {
        provider: ProviderId(1),
        supply: vec![10],
        window: Window::new(0, 3),
        curves: vec![PriceCurve::from_steps(&[(Money(50), 1)], 10).unwrap()],
    };
    let refs: Vec<&Bid> = bids.iter().collect();
    let alloc = find_instance_allocation(1, &refs, &[&offer], &Default::default(), 0);
    let bm = bid_map(refs.iter().copied());
    let om = offer_map([&offer]);

    // kappa 1: users pay their full value, provider takes all surplus
    let sheet = price_allocation(1, &bm, &om, &alloc, Rat::from_integer(1));
    assert_eq!(user_utility(UserId(1), &bm, &alloc, &sheet), Rat::from_integer(0));
    // kappa 0: prices collapse to cost, users take all surplus
    let sheet = price_allocation(1, &bm, &om, &alloc, Rat::from_integer(0));
    assert_eq!(provider_utility(ProviderId(1), &sheet), Rat::from_integer(0));
    assert_eq!(
        user_utility(UserId(1), &bm, &alloc, &sheet),
        Rat::from_integer(1000 - 400)
    );
}
