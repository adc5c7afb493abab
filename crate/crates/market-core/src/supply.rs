//! Remaining per-slot capacity, shared between clearing passes and the
//! simulator's commitments.

use crate::market::{Offer, ProviderId};
use crate::time::Slot;
use std::collections::BTreeMap;

/// Remaining sellable units per (provider, slot, type). Starts at the
/// offered supply and decreases as allocations are committed; clearing
/// passes read it so sold capacity is never resold.
#[derive(Clone, Debug, Default)]
pub struct SupplySchedule {
    consumed: BTreeMap<(ProviderId, Slot), Vec<u32>>,
}

impl SupplySchedule {
    pub fn new() -> SupplySchedule {
        SupplySchedule::default()
    }

    pub fn remaining(&self, offer: &Offer, slot: Slot, k: usize) -> u32 {
        let base = offer.supply.get(k).copied().unwrap_or(0);
        match self.consumed.get(&(offer.provider, slot)) {
            Some(used) => base.saturating_sub(used.get(k).copied().unwrap_or(0)),
            None => base,
        }
    }

    pub fn consume(&mut self, provider: ProviderId, slot: Slot, demand: &[u32]) {
        let used = self
            .consumed
            .entry((provider, slot))
            .or_insert_with(|| vec![0; demand.len()]);
        if used.len() < demand.len() {
            used.resize(demand.len(), 0);
        }
        for (k, &d) in demand.iter().enumerate() {
            used[k] += d;
        }
    }

    /// Units already committed on a provider at a slot.
    pub fn consumed_units(&self, provider: ProviderId, slot: Slot, k: usize) -> u32 {
        self.consumed
            .get(&(provider, slot))
            .and_then(|v| v.get(k).copied())
            .unwrap_or(0)
    }
}
