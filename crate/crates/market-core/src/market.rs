//! Participants: user bids, provider offers, and the market pool.

use crate::curve::{PriceCurve, Quote};
use crate::money::{Money, Rat};
use crate::time::{Slot, Window};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

/// User identifier. Id order fixes every deterministic tie-break.
#[derive(
    Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct UserId(pub u32);

impl fmt::Display for UserId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "u{}", self.0)
    }
}

/// Provider identifier.
#[derive(
    Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct ProviderId(pub u32);

impl fmt::Display for ProviderId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p{}", self.0)
    }
}

/// An all-or-nothing request: `demand[k]` instances of each type, for
/// `length` slots anywhere inside `window`, worth `valuation` in total.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bid {
    pub user: UserId,
    pub demand: Vec<u32>,
    pub length: u32,
    pub window: Window,
    pub valuation: Money,
    /// Slot at which the bid entered the market.
    pub arrival: Slot,
}

impl Bid {
    /// Latest slot by which service must start for the bid to fit.
    pub fn deadline(&self) -> Slot {
        self.window.end.saturating_sub(self.length)
    }

    /// Per-slot valuation v_i / l_i.
    pub fn slot_value(&self) -> Rat {
        Rat::new(self.valuation.cents() as i128, self.length.max(1) as i128)
    }

    pub fn total_units(&self) -> u64 {
        self.demand.iter().map(|&d| d as u64).sum()
    }
}

/// A provider's supply: `supply[k]` instances of type k per slot inside
/// `window`, priced by per-type discount curves.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Offer {
    pub provider: ProviderId,
    pub supply: Vec<u32>,
    pub window: Window,
    pub curves: Vec<PriceCurve>,
}

impl Offer {
    /// Cost of selling the whole demand vector in one slot:
    /// sum over types of d_k * q_k[d_k]. Zero quantities contribute
    /// nothing; a positive quantity with no quoted price makes the whole
    /// bundle unbuyable.
    pub fn bundle_valuation(&self, demand: &[u32]) -> Quote {
        let mut total = Money::ZERO;
        for (k, &d) in demand.iter().enumerate() {
            if d == 0 {
                continue;
            }
            match self.curves.get(k).map(|c| c.quote(d)) {
                Some(Quote::Finite(p)) => total += p * d as i64,
                _ => return Quote::Unbounded,
            }
        }
        Quote::Finite(total)
    }
}

/// Static pool of participants for one clearing problem.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Market {
    /// Number of instance types K; every demand/supply vector has this length.
    pub types: usize,
    pub users: BTreeMap<UserId, Bid>,
    pub providers: BTreeMap<ProviderId, Offer>,
}

impl Market {
    pub fn user_ids(&self) -> impl Iterator<Item = UserId> + '_ {
        self.users.keys().copied()
    }

    pub fn provider_ids(&self) -> impl Iterator<Item = ProviderId> + '_ {
        self.providers.keys().copied()
    }
}
