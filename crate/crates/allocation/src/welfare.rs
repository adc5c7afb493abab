//! Demand analysis, welfare accounting, and output feasibility checks.

use crate::alloc::Allocation;
use crate::{BidMap, OfferMap};
use market_core::{Bid, Money, Quote, Slot, SupplySchedule, Window};
use std::fmt;

/// Union of the bids' effective windows: (min start, max end] over bids
/// with at least one usable slot after `floor`.
pub fn demand_period(bids: &[&Bid], floor: Slot) -> Option<Window> {
    let mut period: Option<Window> = None;
    for bid in bids {
        let w = bid.window.clamped(floor);
        if w.is_empty() {
            continue;
        }
        period = Some(match period {
            Some(p) => Window::new(p.start.min(w.start), p.end.max(w.end)),
            None => w,
        });
    }
    period
}

/// Per-slot contention over the demand period: how many bids' windows
/// contain each slot.
pub fn count_vector(bids: &[&Bid], floor: Slot) -> Option<(Window, Vec<u32>)> {
    let period = demand_period(bids, floor)?;
    let counts = period
        .slots()
        .map(|s| {
            bids.iter()
                .filter(|b| b.window.clamped(floor).contains(s))
                .count() as u32
        })
        .collect();
    Some((period, counts))
}

/// Total value served minus total provider cost, both in exact cents.
/// The cost of a (provider, slot) cell prices the cell's combined demand
/// at the discount depth it reaches.
pub fn social_welfare(
    types: usize,
    bids: &BidMap,
    offers: &OfferMap,
    alloc: &Allocation,
) -> Money {
    let mut total = Money::ZERO;
    for user in alloc.winners() {
        total += bids[&user].valuation;
    }
    for ((provider, _slot), members) in alloc.cell_users() {
        let mut demand = vec![0u32; types];
        for user in members {
            for (k, &d) in bids[&user].demand.iter().enumerate() {
                demand[k] += d;
            }
        }
        match offers[&provider].bundle_valuation(&demand) {
            Quote::Finite(cost) => total -= cost,
            Quote::Unbounded => {
                debug_assert!(false, "allocated cell exceeds the price schedule");
            }
        }
    }
    total
}

/// One broken feasibility constraint in a clearing result.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstraintViolation {
    pub subject: String,
    pub detail: String,
}

impl fmt::Display for ConstraintViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.subject, self.detail)
    }
}

/// Verifies an allocation against the hard feasibility constraints:
/// all-or-nothing service, window containment on both sides, one provider
/// per user-slot (structural), capacity, and the floor.
pub fn check_constraints(
    types: usize,
    bids: &BidMap,
    offers: &OfferMap,
    supply: &SupplySchedule,
    floor: Slot,
    alloc: &Allocation,
) -> Vec<ConstraintViolation> {
    let mut out = Vec::new();
    let mut push = |subject: String, detail: String| {
        out.push(ConstraintViolation { subject, detail });
    };

    for (user, slots) in alloc.iter() {
        let Some(bid) = bids.get(&user) else {
            push(user.to_string(), "allocated but not in the group".into());
            continue;
        };
        if slots.len() as u32 != bid.length {
            push(
                user.to_string(),
                format!("served {} slots, requested {}", slots.len(), bid.length),
            );
        }
        for (&slot, provider) in slots {
            if slot <= floor {
                push(user.to_string(), format!("slot {slot} is not after {floor}"));
            }
            if !bid.window.contains(slot) {
                push(
                    user.to_string(),
                    format!("slot {slot} outside window ({}, {}]", bid.window.start, bid.window.end),
                );
            }
            match offers.get(provider) {
                Some(offer) if !offer.window.contains(slot) => {
                    push(
                        user.to_string(),
                        format!("slot {slot} outside {provider}'s window"),
                    );
                }
                Some(_) => {}
                None => push(
                    user.to_string(),
                    format!("served by {provider}, which is not in the group"),
                ),
            }
        }
    }

    for ((provider, slot), members) in alloc.cell_users() {
        let Some(offer) = offers.get(&provider) else {
            continue;
        };
        let mut demand = vec![0u32; types];
        for user in &members {
            if let Some(bid) = bids.get(user) {
                for (k, &d) in bid.demand.iter().enumerate() {
                    demand[k] += d;
                }
            }
        }
        for (k, &d) in demand.iter().enumerate() {
            let available = supply.remaining(offer, slot, k);
            if d > available {
                push(
                    format!("{provider}@{slot}"),
                    format!("type {} oversold: {d} > {available}", k + 1),
                );
            }
        }
    }

    out
}
