//! Exhaustive optimal clearing for desk-sized markets.
//!
//! Slot-major search with memoization on (slot, remaining service per
//! user). A user is served for exactly its length inside its window or
//! not at all; each served slot picks one provider; per-slot, per-type
//! capacity binds. There is no admission rule here, so the result is an
//! upper bound for any admission-constrained allocator on the same input.

use allocation::Allocation;
use market_core::{Bid, Money, Offer, Slot, UserId};
use num_bigint::BigUint;
use std::collections::HashMap;
use thiserror::Error;

/// Optimal welfare plus one allocation attaining it.
#[derive(Debug)]
pub struct OptimumResult {
    pub welfare: Money,
    pub allocation: Allocation,
    /// Transition leaves evaluated by the search.
    pub nodes: u64,
}

#[derive(Debug, Error)]
pub enum OracleError {
    #[error(
        "search exceeded the node budget of {budget} \
         (full assignment space holds {theoretical} mappings)"
    )]
    TooLarge { budget: u64, theoretical: BigUint },
}

/// Size of the unpruned search space: provider assignments per user, to
/// the power of the number of slots any bid can occupy.
pub fn theoretical_nodes(bids: &[&Bid], offers: &[&Offer]) -> BigUint {
    let mut slots: std::collections::BTreeSet<Slot> = std::collections::BTreeSet::new();
    for b in bids {
        slots.extend(b.window.slots());
    }
    crate::count_mappings(bids.len(), offers.len()).pow(slots.len() as u32)
}

struct Search<'a> {
    types: usize,
    bids: Vec<&'a Bid>,
    offers: Vec<&'a Offer>,
    max_slot: Slot,
    budget: u64,
    nodes: u64,
    /// state -> (best welfare from here on, chosen provider per bid index,
    /// usize::MAX meaning skip)
    memo: HashMap<(Slot, Vec<u8>), Option<(i64, Vec<usize>)>>,
}

const INACTIVE: u8 = 0;

impl<'a> Search<'a> {
    /// In-window slots strictly after `s` for bid `i`.
    fn slots_left(&self, i: usize, s: Slot) -> u32 {
        let w = self.bids[i].window;
        w.end.saturating_sub(w.start.max(s))
    }

    /// Kill partially served users that can no longer finish; retire
    /// unserved ones. Returns None when the state is infeasible.
    fn normalize(&self, state: &mut Vec<u8>, s: Slot) -> Option<()> {
        for (i, r) in state.iter_mut().enumerate() {
            if *r == INACTIVE {
                continue;
            }
            if u32::from(*r) > self.slots_left(i, s) {
                if u32::from(*r) == self.bids[i].length {
                    *r = INACTIVE;
                } else {
                    return None;
                }
            }
        }
        Some(())
    }

    fn solve(&mut self, s: Slot, state: Vec<u8>) -> Result<Option<i64>, OracleError> {
        if s > self.max_slot {
            return Ok(Some(0));
        }
        let key = (s, state.clone());
        if let Some(hit) = self.memo.get(&key) {
            return Ok(hit.as_ref().map(|(w, _)| *w));
        }

        let eligible: Vec<usize> = (0..self.bids.len())
            .filter(|&i| state[i] != INACTIVE && self.bids[i].window.contains(s))
            .collect();

        // remaining capacity per provider at this slot
        let caps: Vec<Vec<u32>> = self
            .offers
            .iter()
            .map(|o| {
                if o.window.contains(s) {
                    o.supply.clone()
                } else {
                    vec![0; self.types]
                }
            })
            .collect();

        let mut best: Option<(i64, Vec<usize>)> = None;
        let mut demand = vec![vec![0u32; self.types]; self.offers.len()];
        let mut picks = vec![usize::MAX; eligible.len()];
        self.branch(
            s,
            &state,
            &eligible,
            &caps,
            0,
            &mut demand,
            &mut picks,
            &mut best,
        )?;

        self.memo.insert(key, best.clone());
        Ok(best.map(|(w, _)| w))
    }

    /// Enumerate provider choices for each eligible bid at slot `s`.
    #[allow(clippy::too_many_arguments)]
    fn branch(
        &mut self,
        s: Slot,
        state: &[u8],
        eligible: &[usize],
        caps: &[Vec<u32>],
        at: usize,
        demand: &mut Vec<Vec<u32>>,
        picks: &mut Vec<usize>,
        best: &mut Option<(i64, Vec<usize>)>,
    ) -> Result<(), OracleError> {
        if at == eligible.len() {
            self.nodes += 1;
            if self.nodes > self.budget {
                return Err(OracleError::TooLarge {
                    budget: self.budget,
                    theoretical: theoretical_nodes(&self.bids, &self.offers),
                });
            }

            let mut cost: i64 = 0;
            for (j, d) in demand.iter().enumerate() {
                let quote = self.offers[j]
                    .bundle_valuation(d)
                    .finite()
                    .expect("capacity check keeps demand inside the curve");
                cost += quote.0;
            }

            let mut next = state.to_vec();
            let mut completed: i64 = 0;
            for (slot_in_picks, &i) in eligible.iter().enumerate() {
                if picks[slot_in_picks] != usize::MAX {
                    next[i] -= 1;
                    if next[i] == 0 {
                        completed += self.bids[i].valuation.0;
                    }
                }
            }
            if self.normalize(&mut next, s).is_none() {
                return Ok(());
            }
            if let Some(tail) = self.solve(s + 1, next)? {
                let total = completed - cost + tail;
                if best.as_ref().map_or(true, |(b, _)| total > *b) {
                    *best = Some((total, picks.clone()));
                }
            }
            return Ok(());
        }

        let i = eligible[at];
        // not serving this bid at this slot
        picks[at] = usize::MAX;
        self.branch(s, state, eligible, caps, at + 1, demand, picks, best)?;

        for j in 0..self.offers.len() {
            let fits = (0..self.types)
                .all(|k| demand[j][k] + self.bids[i].demand[k] <= caps[j][k]);
            if !fits {
                continue;
            }
            for k in 0..self.types {
                demand[j][k] += self.bids[i].demand[k];
            }
            picks[at] = j;
            self.branch(s, state, eligible, caps, at + 1, demand, picks, best)?;
            picks[at] = usize::MAX;
            for k in 0..self.types {
                demand[j][k] -= self.bids[i].demand[k];
            }
        }
        Ok(())
    }
}

/// Best attainable welfare over every feasible allocation, with one
/// witness allocation. Aborts once `budget` transition leaves are spent.
pub fn enumerate_optimum(
    types: usize,
    bids: &[&Bid],
    offers: &[&Offer],
    budget: u64,
) -> Result<OptimumResult, OracleError> {
    let mut sorted: Vec<&Bid> = bids.to_vec();
    sorted.sort_by_key(|b| b.user);
    let mut offers_sorted: Vec<&Offer> = offers.to_vec();
    offers_sorted.sort_by_key(|o| o.provider);

    let max_slot = sorted.iter().map(|b| b.window.end).max().unwrap_or(0);
    let min_slot = sorted
        .iter()
        .map(|b| b.window.start + 1)
        .min()
        .unwrap_or(1);

    let mut search = Search {
        types,
        bids: sorted,
        offers: offers_sorted,
        max_slot,
        budget,
        nodes: 0,
        memo: HashMap::new(),
    };

    let mut initial: Vec<u8> = search.bids.iter().map(|b| b.length as u8).collect();
    let welfare = if search.normalize(&mut initial, min_slot - 1).is_none() {
        None
    } else {
        search.solve(min_slot, initial.clone())?
    };
    let welfare = welfare.unwrap_or(0).max(0);

    // rebuild the witness by replaying the memoized choices
    let mut allocation = Allocation::default();
    let mut state = initial;
    let mut s = min_slot;
    while s <= max_slot {
        let eligible: Vec<usize> = (0..search.bids.len())
            .filter(|&i| state[i] != INACTIVE && search.bids[i].window.contains(s))
            .collect();
        let picks = match search.memo.get(&(s, state.clone())) {
            Some(Some((_, picks))) => picks.clone(),
            _ => break,
        };
        for (at, &i) in eligible.iter().enumerate() {
            if picks[at] != usize::MAX {
                let user: UserId = search.bids[i].user;
                allocation.insert(user, s, search.offers[picks[at]].provider);
                state[i] -= 1;
            }
        }
        if search.normalize(&mut state, s).is_none() {
            break;
        }
        s += 1;
    }
    // zero-welfare optima may carry a zero-surplus witness; drop it so the
    // empty allocation is the canonical answer
    if welfare == 0 {
        allocation = Allocation::default();
    }

    Ok(OptimumResult {
        welfare: Money(welfare),
        allocation,
        nodes: search.nodes,
    })
}
