//! Volume-discount price schedules.

use crate::money::Money;
use serde::{Deserialize, Serialize};

/// Per-unit price for a requested quantity, or no price at all.
///
/// Quantity zero (and any quantity beyond the schedule) is unbuyable
/// rather than free; admission tests treat it as infinitely expensive.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Quote {
    Finite(Money),
    Unbounded,
}

impl Quote {
    pub fn finite(self) -> Option<Money> {
        match self {
            Quote::Finite(m) => Some(m),
            Quote::Unbounded => None,
        }
    }
}

/// Discount schedule for one instance type: unit price q[n] when n units
/// are sold in one slot, non-increasing in n, defined for n = 1..=supply.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PriceCurve(Vec<Money>);

impl PriceCurve {
    pub fn new(prices: Vec<Money>) -> PriceCurve {
        PriceCurve(prices)
    }

    /// Expands a step list [(unit_price, from_n), ...] into a dense
    /// schedule of length `supply`. Steps must start at n = 1, be strictly
    /// increasing in n, and stay within the supply.
    pub fn from_steps(steps: &[(Money, u32)], supply: u32) -> Result<PriceCurve, String> {
        if supply == 0 {
            if steps.is_empty() {
                return Ok(PriceCurve(Vec::new()));
            }
            return Err("steps given for a type with zero supply".into());
        }
        if steps.is_empty() {
            return Err("empty step list".into());
        }
        if steps[0].1 != 1 {
            return Err(format!("first step starts at n={}, expected 1", steps[0].1));
        }
        let mut dense = Vec::with_capacity(supply as usize);
        for (idx, &(price, from)) in steps.iter().enumerate() {
            let upto = match steps.get(idx + 1) {
                Some(&(_, next_from)) => {
                    if next_from <= from {
                        return Err(format!(
                            "step boundaries must increase: {next_from} after {from}"
                        ));
                    }
                    next_from - 1
                }
                None => supply,
            };
            if from > supply {
                return Err(format!("step at n={from} exceeds supply {supply}"));
            }
            for _ in from..=upto.min(supply) {
                dense.push(price);
            }
        }
        Ok(PriceCurve(dense))
    }

    /// Canonical step-list form: (price, first n with that price).
    pub fn to_steps(&self) -> Vec<(Money, u32)> {
        let mut steps = Vec::new();
        for (i, &p) in self.0.iter().enumerate() {
            if steps.last().map(|&(q, _)| q != p).unwrap_or(true) {
                steps.push((p, i as u32 + 1));
            }
        }
        steps
    }

    pub fn len(&self) -> u32 {
        self.0.len() as u32
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Unit price for n units.
    pub fn quote(&self, n: u32) -> Quote {
        if n == 0 || n as usize > self.0.len() {
            Quote::Unbounded
        } else {
            Quote::Finite(self.0[(n - 1) as usize])
        }
    }

    pub fn prices(&self) -> &[Money] {
        &self.0
    }
}
