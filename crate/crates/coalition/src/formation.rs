//! The migrate/merge/split dynamics over a group structure.
//!
//! Sweeps run users in ascending id order, then providers in ascending id
//! order (merge attempt, then split attempt). A history set of group
//! fingerprints blocks re-creating any group seen before; the run ends on
//! the first sweep that changes nothing. Users the clearing pass leaves
//! unserved stay in their groups with zero payoff; only a strictly better
//! group can draw them away.

use crate::payoff::EvalContext;
use crate::stability::epsilon_star;
use crate::structure::{Group, GroupKey, GroupStructure};
use market_core::{FormationParams, HistoryGranularity, Money, ProviderId, Rat, UserId};
use num_traits::Zero;
use std::collections::BTreeSet;

/// One accepted decision, as recorded in the run trace.
#[derive(Debug, Clone)]
pub enum DecisionRecord {
    Migrate {
        user: UserId,
        to: GroupKey,
        gain: Rat,
    },
    Merge {
        initiator: ProviderId,
        merged: GroupKey,
        gain: Rat,
    },
    Split {
        initiator: ProviderId,
        fragments: (GroupKey, GroupKey),
        gain: Rat,
    },
}

/// Everything that happened in one sweep.
#[derive(Debug, Clone)]
pub struct SweepRecord {
    pub decisions: Vec<DecisionRecord>,
    /// Total welfare over all groups at sweep end.
    pub welfare: Money,
    /// Stability slack (users, providers) at sweep end.
    pub epsilon: (Rat, Rat),
    /// Structure fingerprint at sweep end.
    pub fingerprint: String,
}

/// Result of running the dynamics to quiescence.
#[derive(Debug)]
pub struct FormationOutcome {
    pub structure: GroupStructure,
    pub sweeps: Vec<SweepRecord>,
    /// True when the last sweep accepted nothing (as opposed to hitting
    /// the sweep cap).
    pub converged: bool,
    pub final_epsilon: (Rat, Rat),
    /// Structure fingerprint after every accepted decision, for revisit
    /// analysis.
    pub decision_fingerprints: Vec<String>,
}

impl FormationOutcome {
    /// Total welfare of the final structure.
    pub fn final_welfare(&self, ctx: &EvalContext) -> Money {
        structure_welfare(ctx, &self.structure)
    }
}

/// Sum of group welfares; the waiting pool trades nothing.
pub fn structure_welfare(ctx: &EvalContext, structure: &GroupStructure) -> Money {
    structure
        .groups
        .iter()
        .map(|g| ctx.eval(g).welfare)
        .sum()
}

fn payoff_of_user(ctx: &EvalContext, structure: &GroupStructure, user: UserId) -> Rat {
    match structure.group_of_user(user) {
        Some(gi) => ctx
            .eval(&structure.groups[gi])
            .user_payoff
            .get(&user)
            .copied()
            .unwrap_or_else(Rat::zero),
        None => Rat::zero(),
    }
}

/// Set a user's link from the group's cleared schedule: the provider at
/// its last served slot, else the group's lowest provider.
fn refresh_link(ctx: &EvalContext, structure: &mut GroupStructure, gi: usize, user: UserId) {
    let group = &structure.groups[gi];
    let eval = ctx.eval(group);
    let link = eval
        .alloc
        .slots_of(user)
        .and_then(|slots| slots.values().last().copied())
        .unwrap_or_else(|| group.anchor());
    structure.links.insert(user, link);
}

fn record_history(history: &mut BTreeSet<GroupKey>, structure: &GroupStructure) {
    for g in &structure.groups {
        history.insert(g.key());
    }
}

/// Run the dynamics from an initial structure until no decision is
/// accepted or the sweep cap is reached.
pub fn find_group_structure(
    ctx: &EvalContext,
    initial: GroupStructure,
    params: &FormationParams,
) -> FormationOutcome {
    let mut structure = initial;
    structure.canonicalize();
    for gi in 0..structure.groups.len() {
        for user in structure.groups[gi].users.clone() {
            refresh_link(ctx, &mut structure, gi, user);
        }
    }

    let mut history: BTreeSet<GroupKey> = BTreeSet::new();
    record_history(&mut history, &structure);
    let per_decision = params.history == HistoryGranularity::Decision;

    let mut sweeps = Vec::new();
    let mut decision_fingerprints = Vec::new();
    let mut converged = false;

    for _ in 0..params.max_sweeps {
        let mut decisions = Vec::new();

        // user phase: strict-gain migrations into provider groups
        let users: Vec<UserId> = structure.all_users().into_iter().collect();
        for user in users {
            let current = payoff_of_user(ctx, &structure, user);
            let origin = structure.group_of_user(user);

            let mut best: Option<(usize, Rat)> = None;
            for (gi, group) in structure.groups.iter().enumerate() {
                if origin == Some(gi) {
                    continue;
                }
                let enlarged = group.with_user(user);
                if history.contains(&enlarged.key()) {
                    continue;
                }
                let gain = ctx.eval(&enlarged).user_payoff[&user] - current;
                if gain > Rat::zero() && best.map_or(true, |(_, g)| gain > g) {
                    best = Some((gi, gain));
                }
            }

            if let Some((gi, gain)) = best {
                if let Some(oi) = origin {
                    structure.groups[oi].users.remove(&user);
                } else {
                    structure.waiting.remove(&user);
                }
                structure.groups[gi].users.insert(user);
                refresh_link(ctx, &mut structure, gi, user);
                if per_decision {
                    history.insert(structure.groups[gi].key());
                }
                decisions.push(DecisionRecord::Migrate {
                    user,
                    to: structure.groups[gi].key(),
                    gain,
                });
                decision_fingerprints.push(structure.fingerprint());
            }
        }

        // provider phase
        let providers: Vec<ProviderId> = ctx.market.provider_ids().collect();
        for provider in providers {
            if let Some(d) = try_merge(ctx, &mut structure, &mut history, provider, per_decision) {
                decisions.push(d);
                decision_fingerprints.push(structure.fingerprint());
            }
            if let Some(d) = try_split(ctx, &mut structure, &mut history, provider, per_decision) {
                decisions.push(d);
                decision_fingerprints.push(structure.fingerprint());
            }
        }

        record_history(&mut history, &structure);

        let changed = !decisions.is_empty();
        let epsilon = epsilon_star(ctx, &structure);
        sweeps.push(SweepRecord {
            decisions,
            welfare: structure_welfare(ctx, &structure),
            epsilon,
            fingerprint: structure.fingerprint(),
        });

        if !changed {
            converged = true;
            break;
        }
    }

    let final_epsilon = sweeps
        .last()
        .map(|s| s.epsilon)
        .unwrap_or((Rat::zero(), Rat::zero()));
    FormationOutcome {
        structure,
        sweeps,
        converged,
        final_epsilon,
        decision_fingerprints,
    }
}

/// Merge the initiator's group with the best other group that strictly
/// improves the initiator and weakly improves every member of both groups.
fn try_merge(
    ctx: &EvalContext,
    structure: &mut GroupStructure,
    history: &mut BTreeSet<GroupKey>,
    initiator: ProviderId,
    per_decision: bool,
) -> Option<DecisionRecord> {
    let gi = structure.group_of_provider(initiator)?;
    let own = structure.groups[gi].clone();
    let own_eval = ctx.eval(&own);

    let mut best: Option<(usize, Group, Rat)> = None;
    for (gj, other) in structure.groups.iter().enumerate() {
        if gj == gi {
            continue;
        }
        let merged = Group {
            users: own.users.union(&other.users).copied().collect(),
            providers: own.providers.union(&other.providers).copied().collect(),
        };
        if history.contains(&merged.key()) {
            continue;
        }
        let merged_eval = ctx.eval(&merged);
        let other_eval = ctx.eval(other);

        let gain = merged_eval.provider_payoff[&initiator] - own_eval.provider_payoff[&initiator];
        if gain <= Rat::zero() {
            continue;
        }
        let harmed = own
            .users
            .iter()
            .map(|u| (merged_eval.user_payoff[u], own_eval.user_payoff[u]))
            .chain(
                other
                    .users
                    .iter()
                    .map(|u| (merged_eval.user_payoff[u], other_eval.user_payoff[u])),
            )
            .chain(
                own.providers
                    .iter()
                    .map(|p| (merged_eval.provider_payoff[p], own_eval.provider_payoff[p])),
            )
            .chain(other.providers.iter().map(|p| {
                (
                    merged_eval.provider_payoff[p],
                    other_eval.provider_payoff[p],
                )
            }))
            .any(|(after, before)| after < before);
        if harmed {
            continue;
        }
        if best.as_ref().map_or(true, |(_, _, g)| gain > *g) {
            best = Some((gj, merged, gain));
        }
    }

    let (gj, merged, gain) = best?;
    let key = merged.key();
    let (keep, drop) = (gi.min(gj), gi.max(gj));
    structure.groups[keep] = merged;
    structure.groups.remove(drop);
    structure.canonicalize();
    let new_index = structure.group_of_provider(initiator).unwrap();
    for user in structure.groups[new_index].users.clone() {
        refresh_link(ctx, structure, new_index, user);
    }
    if per_decision {
        history.insert(key.clone());
    }
    Some(DecisionRecord::Merge {
        initiator,
        merged: key,
        gain,
    })
}

/// Split the initiator's group along its links into the best bipartition
/// that strictly improves the initiator and weakly improves every member.
fn try_split(
    ctx: &EvalContext,
    structure: &mut GroupStructure,
    history: &mut BTreeSet<GroupKey>,
    initiator: ProviderId,
    per_decision: bool,
) -> Option<DecisionRecord> {
    let gi = structure.group_of_provider(initiator)?;
    let source = structure.groups[gi].clone();
    if source.providers.len() < 2 {
        return None;
    }
    let source_eval = ctx.eval(&source);
    let providers: Vec<ProviderId> = source.providers.iter().copied().collect();
    let anchor = providers[0];

    let mut best: Option<(Group, Group, Rat)> = None;
    // enumerate bipartitions once by keeping the anchor on the left
    for mask in 0..(1u32 << (providers.len() - 1)) {
        let mut left = BTreeSet::new();
        let mut right = BTreeSet::new();
        left.insert(anchor);
        for (bit, &p) in providers[1..].iter().enumerate() {
            if mask & (1 << bit) != 0 {
                left.insert(p);
            } else {
                right.insert(p);
            }
        }
        if right.is_empty() {
            continue;
        }

        let mut frag_left = Group {
            users: BTreeSet::new(),
            providers: left,
        };
        let mut frag_right = Group {
            users: BTreeSet::new(),
            providers: right,
        };
        for &u in &source.users {
            let link = structure.links.get(&u).copied().unwrap_or(anchor);
            if frag_left.providers.contains(&link) {
                frag_left.users.insert(u);
            } else {
                frag_right.users.insert(u);
            }
        }
        if history.contains(&frag_left.key()) || history.contains(&frag_right.key()) {
            continue;
        }

        let left_eval = ctx.eval(&frag_left);
        let right_eval = ctx.eval(&frag_right);
        let own_side = if frag_left.providers.contains(&initiator) {
            &left_eval
        } else {
            &right_eval
        };
        let gain =
            own_side.provider_payoff[&initiator] - source_eval.provider_payoff[&initiator];
        if gain <= Rat::zero() {
            continue;
        }

        let harmed = frag_left
            .users
            .iter()
            .map(|u| (left_eval.user_payoff[u], source_eval.user_payoff[u]))
            .chain(
                frag_right
                    .users
                    .iter()
                    .map(|u| (right_eval.user_payoff[u], source_eval.user_payoff[u])),
            )
            .chain(frag_left.providers.iter().map(|p| {
                (
                    left_eval.provider_payoff[p],
                    source_eval.provider_payoff[p],
                )
            }))
            .chain(frag_right.providers.iter().map(|p| {
                (
                    right_eval.provider_payoff[p],
                    source_eval.provider_payoff[p],
                )
            }))
            .any(|(after, before)| after < before);
        if harmed {
            continue;
        }
        if best.as_ref().map_or(true, |(_, _, g)| gain > *g) {
            best = Some((frag_left, frag_right, gain));
        }
    }

    let (frag_left, frag_right, gain) = best?;
    let keys = (frag_left.key(), frag_right.key());
    structure.groups[gi] = frag_left;
    structure.groups.push(frag_right);
    structure.canonicalize();
    for key in [&keys.0, &keys.1] {
        let idx = structure
            .groups
            .iter()
            .position(|g| g.key() == *key)
            .unwrap();
        for user in structure.groups[idx].users.clone() {
            refresh_link(ctx, structure, idx, user);
        }
        if per_decision {
            history.insert(key.clone());
        }
    }
    Some(DecisionRecord::Split {
        initiator,
        fragments: keys,
        gain,
    })
}
