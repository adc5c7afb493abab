//! The clearing pass.
//!
//! Slots are processed in contention order (most requested first). Within a
//! slot, users are offered in per-slot-valuation order into sub-groups:
//! sets of users that share one provider's discount. A sub-group admits a
//! candidate only when some provider can serve the combined demand within
//! remaining capacity at a bundle cost no greater than the combined
//! per-slot valuation; the cheapest such provider (then lowest id) wins,
//! and the whole sub-group moves to it. A user rejected by a sub-group may
//! not be served by that sub-group's provider later in the same slot.
//!
//! After the sweep, users served fewer slots than requested are rolled
//! back, and any (provider, slot) cell whose bundle cost now exceeds its
//! members' combined valuation sheds its least-valuable member until the
//! cost is covered again. Freed capacity is never re-offered within a run.

use crate::alloc::Allocation;
use crate::welfare::count_vector;
use market_core::{Bid, Money, Offer, Quote, Rat, Slot, SupplySchedule, Window};
use std::collections::BTreeMap;
use std::collections::BTreeSet;

struct UserState<'a> {
    bid: &'a Bid,
    window: Window,
    value: Rat,
    remaining: u32,
    dead: bool,
    taken: Vec<(Slot, usize)>,
}

struct SubGroup {
    members: Vec<usize>,
    offer: usize,
    demand: Vec<u32>,
    value: Rat,
}

/// Clears one group: `bids` against `offers`, honoring remaining capacity
/// in `supply` and considering only slots strictly after `floor`.
pub fn find_instance_allocation(
    types: usize,
    bids: &[&Bid],
    offers: &[&Offer],
    supply: &SupplySchedule,
    floor: Slot,
) -> Allocation {
    let mut out = Allocation::new();
    if bids.is_empty() || offers.is_empty() {
        return out;
    }

    let mut states: Vec<UserState> = bids
        .iter()
        .map(|bid| {
            let window = bid.window.clamped(floor);
            UserState {
                bid,
                window,
                value: bid.slot_value(),
                remaining: bid.length,
                dead: window.len() < bid.length || bid.demand.len() != types,
                taken: Vec::new(),
            }
        })
        .collect();

    let Some((period, counts)) = count_vector(bids, floor) else {
        return out;
    };

    // densest slot first; earlier slot on ties
    let mut order: Vec<(Slot, u32)> = period
        .slots()
        .zip(counts.iter().copied())
        .filter(|&(_, c)| c > 0)
        .collect();
    order.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));

    let mut processed: BTreeSet<Slot> = BTreeSet::new();

    for &(slot, _) in &order {
        let mut eligible: Vec<usize> = (0..states.len())
            .filter(|&ui| {
                let st = &states[ui];
                !st.dead && st.remaining > 0 && st.window.contains(slot)
            })
            .collect();
        eligible.sort_by(|&a, &b| {
            states[b]
                .value
                .cmp(&states[a].value)
                .then(states[a].bid.user.cmp(&states[b].bid.user))
        });

        let mut subgroups: Vec<SubGroup> = Vec::new();
        for ui in eligible {
            admit(
                ui,
                slot,
                types,
                &states,
                offers,
                supply,
                &mut subgroups,
            );
        }

        for sg in &subgroups {
            for &ui in &sg.members {
                states[ui].taken.push((slot, sg.offer));
                states[ui].remaining -= 1;
            }
        }

        processed.insert(slot);
        for st in states.iter_mut() {
            if st.dead || st.remaining == 0 {
                continue;
            }
            let open = st
                .window
                .slots()
                .filter(|s| !processed.contains(s))
                .count() as u32;
            if open < st.remaining {
                st.dead = true;
            }
        }
    }

    // roll back everyone not served in full
    let mut survivors: Vec<usize> = (0..states.len())
        .filter(|&ui| !states[ui].dead && states[ui].remaining == 0)
        .collect();

    // a rollback can uncover a cell whose bundle cost is no longer covered
    // (discounts shrink as demand shrinks); shed members until covered
    loop {
        let mut cells: BTreeMap<(u32, Slot), Vec<usize>> = BTreeMap::new();
        for &ui in &survivors {
            for &(slot, oi) in &states[ui].taken {
                cells
                    .entry((offers[oi].provider.0, slot))
                    .or_default()
                    .push(ui);
            }
        }
        let mut victim: Option<usize> = None;
        for ((pid, _slot), members) in &cells {
            let oi = offers
                .iter()
                .position(|o| o.provider.0 == *pid)
                .expect("cell provider exists");
            let mut demand = vec![0u32; types];
            let mut value = Rat::from_integer(0);
            for &ui in members {
                for (k, &d) in states[ui].bid.demand.iter().enumerate() {
                    demand[k] += d;
                }
                value += states[ui].value;
            }
            let covered = match offers[oi].bundle_valuation(&demand) {
                Quote::Finite(v) => v.to_rat() <= value,
                Quote::Unbounded => false,
            };
            if !covered {
                let weakest = members
                    .iter()
                    .copied()
                    .min_by(|&a, &b| {
                        states[a]
                            .value
                            .cmp(&states[b].value)
                            .then(states[b].bid.user.cmp(&states[a].bid.user))
                    })
                    .expect("violated cell has members");
                victim = Some(weakest);
                break;
            }
        }
        match victim {
            Some(ui) => survivors.retain(|&v| v != ui),
            None => break,
        }
    }

    for ui in survivors {
        for &(slot, oi) in &states[ui].taken {
            out.insert(states[ui].bid.user, slot, offers[oi].provider);
        }
    }
    out
}

/// Offers one user into the slot's sub-groups, mutating them on success.
fn admit(
    ui: usize,
    slot: Slot,
    types: usize,
    states: &[UserState],
    offers: &[&Offer],
    supply: &SupplySchedule,
    subgroups: &mut Vec<SubGroup>,
) {
    let mut excluded: BTreeSet<usize> = BTreeSet::new();
    let n_existing = subgroups.len();
    let slots_to_try = n_existing + usize::from(n_existing < offers.len());

    for g in 0..slots_to_try {
        let is_new = g == n_existing;
        let mut demand = states[ui].bid.demand.clone();
        demand.resize(types, 0);
        let mut value = states[ui].value;
        if !is_new {
            for (k, &d) in subgroups[g].demand.iter().enumerate() {
                demand[k] += d;
            }
            value += subgroups[g].value;
        }

        let mut best: Option<(Money, usize)> = None;
        'offers: for (oi, offer) in offers.iter().enumerate() {
            if excluded.contains(&oi) || !offer.window.contains(slot) {
                continue;
            }
            for (k, &d) in demand.iter().enumerate() {
                let colocated: u32 = subgroups
                    .iter()
                    .enumerate()
                    .filter(|&(h, sg)| (is_new || h != g) && sg.offer == oi)
                    .map(|(_, sg)| sg.demand[k])
                    .sum();
                if d + colocated > supply.remaining(offer, slot, k) {
                    continue 'offers;
                }
            }
            if let Quote::Finite(cost) = offer.bundle_valuation(&demand) {
                if cost.to_rat() <= value {
                    let better = match best {
                        Some((bc, boi)) => {
                            (cost, offer.provider) < (bc, offers[boi].provider)
                        }
                        None => true,
                    };
                    if better {
                        best = Some((cost, oi));
                    }
                }
            }
        }

        match best {
            Some((_, oi)) => {
                if is_new {
                    subgroups.push(SubGroup {
                        members: vec![ui],
                        offer: oi,
                        demand,
                        value,
                    });
                } else {
                    let sg = &mut subgroups[g];
                    sg.members.push(ui);
                    sg.offer = oi;
                    sg.demand = demand;
                    sg.value = value;
                }
                return;
            }
            None => {
                if is_new {
                    return;
                }
                excluded.insert(subgroups[g].offer);
            }
        }
    }
}
