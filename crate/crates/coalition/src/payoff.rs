//! Per-group clearing, pricing, and penalty-adjusted payoffs, with a cache
//! keyed by group fingerprint.

use crate::structure::{Group, GroupKey};
use allocation::{bid_map, find_instance_allocation, offer_map, social_welfare, Allocation};
use market_core::{Bid, Market, Money, Offer, ProviderId, Rat, Slot, SupplySchedule, UserId};
use pricing::{price_allocation, provider_utility, user_utility, PriceSheet};
use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::rc::Rc;

/// Everything the formation game needs to know about one group.
#[derive(Debug)]
pub struct GroupEval {
    pub alloc: Allocation,
    pub sheet: PriceSheet,
    pub welfare: Money,
    pub winners: BTreeSet<UserId>,
    /// Trade utility minus delay penalty per member user.
    pub user_payoff: BTreeMap<UserId, Rat>,
    /// Trade utility minus migration penalty per member provider.
    pub provider_payoff: BTreeMap<ProviderId, Rat>,
}

/// Slots served after a user's ideal finish accrue a per-slot delay charge.
pub fn delay_penalty(bid: &Bid, slots: &BTreeMap<Slot, ProviderId>, cost: Money) -> Money {
    let ideal_finish = bid.window.start + bid.length;
    let mut units: i64 = 0;
    for &s in slots.keys() {
        if s > ideal_finish {
            units += (s - ideal_finish) as i64;
        }
    }
    cost * units
}

/// Cells whose user ran on a different provider in the directly preceding
/// slot; each such cell bills the receiving provider once.
pub fn migration_cells(alloc: &Allocation) -> BTreeSet<(ProviderId, Slot)> {
    let mut cells = BTreeSet::new();
    for (_, slots) in alloc.iter() {
        let mut prev: Option<(Slot, ProviderId)> = None;
        for (&s, &p) in slots {
            if let Some((ps, pp)) = prev {
                if ps + 1 == s && pp != p {
                    cells.insert((p, s));
                }
            }
            prev = Some((s, p));
        }
    }
    cells
}

/// Shared market data plus the evaluation cache for one formation run.
pub struct EvalContext<'a> {
    pub market: &'a Market,
    pub kappa: Rat,
    pub delay_cost: Money,
    pub migration_cost: Money,
    /// Slots at or before the floor are already in the past.
    pub floor: Slot,
    pub supply: &'a SupplySchedule,
    cache: RefCell<BTreeMap<GroupKey, Rc<GroupEval>>>,
}

impl<'a> EvalContext<'a> {
    pub fn new(
        market: &'a Market,
        kappa: Rat,
        delay_cost: Money,
        migration_cost: Money,
        floor: Slot,
        supply: &'a SupplySchedule,
    ) -> Self {
        EvalContext {
            market,
            kappa,
            delay_cost,
            migration_cost,
            floor,
            supply,
            cache: RefCell::new(BTreeMap::new()),
        }
    }

    /// Number of distinct groups evaluated so far.
    pub fn evaluations(&self) -> usize {
        self.cache.borrow().len()
    }

    /// Clear, price, and score one group, memoized by fingerprint.
    pub fn eval(&self, group: &Group) -> Rc<GroupEval> {
        let key = group.key();
        if let Some(hit) = self.cache.borrow().get(&key) {
            return Rc::clone(hit);
        }
        let eval = Rc::new(self.eval_uncached(group));
        self.cache.borrow_mut().insert(key, Rc::clone(&eval));
        eval
    }

    fn eval_uncached(&self, group: &Group) -> GroupEval {
        let bids: Vec<&Bid> = group
            .users
            .iter()
            .filter_map(|u| self.market.users.get(u))
            .collect();
        let offers: Vec<&Offer> = group
            .providers
            .iter()
            .filter_map(|p| self.market.providers.get(p))
            .collect();

        let alloc =
            find_instance_allocation(self.market.types, &bids, &offers, self.supply, self.floor);
        let bm = bid_map(bids.iter().copied());
        let om = offer_map(offers.iter().copied());
        let sheet = price_allocation(self.market.types, &bm, &om, &alloc, self.kappa);
        let welfare = social_welfare(self.market.types, &bm, &om, &alloc);

        let mut user_payoff = BTreeMap::new();
        for &u in &group.users {
            let mut payoff = user_utility(u, &bm, &alloc, &sheet);
            if let Some(slots) = alloc.slots_of(u) {
                payoff -= delay_penalty(&self.market.users[&u], slots, self.delay_cost).to_rat();
            }
            user_payoff.insert(u, payoff);
        }

        let moved = migration_cells(&alloc);
        let mut provider_payoff = BTreeMap::new();
        for &p in &group.providers {
            let mut payoff = provider_utility(p, &sheet);
            let cells = moved.iter().filter(|(mp, _)| *mp == p).count() as i64;
            payoff -= (self.migration_cost * cells).to_rat();
            provider_payoff.insert(p, payoff);
        }

        GroupEval {
            winners: alloc.winners().collect(),
            alloc,
            sheet,
            welfare,
            user_payoff,
            provider_payoff,
        }
    }
}
