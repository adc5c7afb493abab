//! Group-slot price construction and proportional user shares.

use allocation::{Allocation, BidMap, OfferMap};
use market_core::{Money, ProviderId, Rat, Slot, UserId};
use num_traits::Zero;
use std::collections::BTreeMap;

/// Per-slot prices and their split across a group's served users.
///
/// All amounts are exact rationals in cents; settlement rounds them later.
#[derive(Debug, Clone)]
pub struct PriceSheet {
    /// Blend weight between total user value and total provider cost.
    pub kappa: Rat,
    /// Sum of served users' per-slot valuations at each slot.
    pub slot_value: BTreeMap<Slot, Rat>,
    /// Sum of provider bundle valuations at each slot.
    pub slot_cost: BTreeMap<Slot, Money>,
    /// The group price per slot.
    pub group_prices: BTreeMap<Slot, Rat>,
    /// Each served user's share of the slot price.
    pub shares: BTreeMap<(UserId, Slot), Rat>,
    /// Shares routed to the provider serving the payer at that slot.
    pub cell_revenue: BTreeMap<(ProviderId, Slot), Rat>,
    /// Bundle cost per provider and slot.
    pub cell_cost: BTreeMap<(ProviderId, Slot), Money>,
}

impl PriceSheet {
    /// Total rational charge accumulated by one user.
    pub fn user_charge(&self, user: UserId) -> Rat {
        self.shares
            .iter()
            .filter(|((u, _), _)| *u == user)
            .map(|(_, share)| *share)
            .sum()
    }

    /// Total rational revenue routed to one provider.
    pub fn provider_revenue(&self, provider: ProviderId) -> Rat {
        self.cell_revenue
            .iter()
            .filter(|((p, _), _)| *p == provider)
            .map(|(_, r)| *r)
            .sum()
    }

    /// Total bundle cost borne by one provider.
    pub fn provider_cost(&self, provider: ProviderId) -> Money {
        self.cell_cost
            .iter()
            .filter(|((p, _), _)| *p == provider)
            .map(|(_, c)| *c)
            .sum()
    }

    /// Sum of all group prices, which equals the sum of all shares.
    pub fn total(&self) -> Rat {
        self.group_prices.values().copied().sum()
    }
}

/// Price charged to a group at one slot: kappa * value + (1 - kappa) * cost.
pub fn group_price(slot_value: Rat, slot_cost: Money, kappa: Rat) -> Rat {
    kappa * slot_value + (Rat::from_integer(1) - kappa) * slot_cost.to_rat()
}

/// One user's proportional share of a slot's group price.
pub fn trading_price(user_slot_value: Rat, slot_value: Rat, group_price: Rat) -> Rat {
    if slot_value.is_zero() {
        Rat::zero()
    } else {
        user_slot_value / slot_value * group_price
    }
}

/// Price a cleared allocation for one group.
pub fn price_allocation(
    types: usize,
    bids: &BidMap,
    offers: &OfferMap,
    alloc: &Allocation,
    kappa: Rat,
) -> PriceSheet {
    let mut sheet = PriceSheet {
        kappa,
        slot_value: BTreeMap::new(),
        slot_cost: BTreeMap::new(),
        group_prices: BTreeMap::new(),
        shares: BTreeMap::new(),
        cell_revenue: BTreeMap::new(),
        cell_cost: BTreeMap::new(),
    };

    for ((provider, slot), users) in alloc.cell_users() {
        let offer = &offers[&provider];
        let mut demand = vec![0u32; types];
        for user in &users {
            for (k, d) in bids[user].demand.iter().enumerate() {
                demand[k] += d;
            }
            *sheet.slot_value.entry(slot).or_insert_with(Rat::zero) +=
                bids[user].slot_value();
        }
        let cost = offer
            .bundle_valuation(&demand)
            .finite()
            .expect("cleared cell exceeds the provider's curve");
        sheet.cell_cost.insert((provider, slot), cost);
        *sheet.slot_cost.entry(slot).or_insert(Money::ZERO) += cost;
    }

    let slots: Vec<Slot> = sheet.slot_value.keys().copied().collect();
    for slot in slots {
        let value = sheet.slot_value[&slot];
        let cost = sheet.slot_cost[&slot];
        let price = group_price(value, cost, kappa);
        sheet.group_prices.insert(slot, price);

        for (user, slots_of) in alloc.iter() {
            if let Some(&provider) = slots_of.get(&slot) {
                let share = trading_price(bids[&user].slot_value(), value, price);
                sheet.shares.insert((user, slot), share);
                *sheet
                    .cell_revenue
                    .entry((provider, slot))
                    .or_insert_with(Rat::zero) += share;
            }
        }
    }
    sheet
}
