//! Rounding rational shares to exact cents without breaking budget balance
//! or individual rationality.

use crate::sheet::PriceSheet;
use allocation::{Allocation, BidMap};
use market_core::{floor_cents, Money, ProviderId, UserId};
use std::collections::BTreeMap;

/// Integer-cent payments and revenues for one priced group.
#[derive(Debug, Clone, Default)]
pub struct Settlement {
    pub user_payments: BTreeMap<UserId, Money>,
    pub provider_revenue: BTreeMap<ProviderId, Money>,
    /// Cents that could not be placed without charging someone past its
    /// valuation; they reduce provider revenue rather than violate it.
    pub dropped_cents: i64,
}

impl Settlement {
    pub fn total_paid(&self) -> Money {
        self.user_payments.values().copied().sum()
    }

    pub fn total_revenue(&self) -> Money {
        self.provider_revenue.values().copied().sum()
    }
}

/// Round a price sheet to cents, slot by slot.
///
/// Per slot the target is the floor of the group price; users pay the
/// floors of their shares and the remaining cents go to the largest
/// fractional remainders (ties: fewest extra cents so far, then lower id).
/// No user is ever pushed past its valuation in cents.
pub fn settle(sheet: &PriceSheet, bids: &BidMap, alloc: &Allocation) -> Settlement {
    let mut out = Settlement::default();
    let mut bumps: BTreeMap<UserId, u32> = BTreeMap::new();

    for (&slot, &price) in &sheet.group_prices {
        let target = floor_cents(price);
        let mut paid_here: BTreeMap<UserId, Money> = BTreeMap::new();
        let mut remainders: Vec<(UserId, market_core::Rat)> = Vec::new();

        for ((user, s), &share) in &sheet.shares {
            if *s != slot {
                continue;
            }
            let base = floor_cents(share);
            paid_here.insert(*user, base);
            remainders.push((*user, share - base.to_rat()));
        }

        let base_sum: Money = paid_here.values().copied().sum();
        let mut extra = (target - base_sum).0;
        debug_assert!(extra >= 0);

        remainders.sort_by(|a, b| {
            b.1.cmp(&a.1)
                .then_with(|| bumps.get(&a.0).copied().unwrap_or(0).cmp(&bumps.get(&b.0).copied().unwrap_or(0)))
                .then_with(|| a.0.cmp(&b.0))
        });

        let mut idx = 0;
        while extra > 0 && idx < remainders.len() {
            let user = remainders[idx].0;
            let already = out.user_payments.get(&user).copied().unwrap_or(Money::ZERO)
                + paid_here[&user];
            if already + Money(1) <= bids[&user].valuation {
                *paid_here.get_mut(&user).unwrap() += Money(1);
                *bumps.entry(user).or_insert(0) += 1;
                extra -= 1;
            }
            idx += 1;
        }
        out.dropped_cents += extra;

        for (user, payment) in paid_here {
            *out.user_payments.entry(user).or_insert(Money::ZERO) += payment;
            let provider = alloc.slots_of(user).unwrap()[&slot];
            *out.provider_revenue.entry(provider).or_insert(Money::ZERO) += payment;
        }
    }
    out
}

/// Check budget balance and cent-level individual rationality.
pub fn verify_settlement(settlement: &Settlement, bids: &BidMap) -> Vec<String> {
    let mut problems = Vec::new();
    if settlement.total_paid() != settlement.total_revenue() {
        problems.push(format!(
            "payments {} do not match revenues {}",
            settlement.total_paid(),
            settlement.total_revenue()
        ));
    }
    for (user, paid) in &settlement.user_payments {
        match bids.get(user) {
            Some(bid) if *paid > bid.valuation => problems.push(format!(
                "{user} pays {paid}, above its valuation {}",
                bid.valuation
            )),
            Some(_) => {}
            None => problems.push(format!("{user} pays {paid} without a bid")),
        }
    }
    if settlement.dropped_cents < 0 {
        problems.push("negative dropped cents".into());
    }
    problems
}
