//! Stability slack: how much any participant could still gain by a
//! unilateral (and for providers, legal) deviation from a structure.

use crate::payoff::EvalContext;
use crate::structure::{Group, GroupStructure};
use market_core::Rat;
use num_traits::Zero;
use std::collections::BTreeSet;

/// Best strict gains still on the table, ignoring the history set:
/// `(user slack, provider slack)`. `(0, 0)` certifies that no user wants
/// to move and no provider has a legal merge or split left.
pub fn epsilon_star(ctx: &EvalContext, structure: &GroupStructure) -> (Rat, Rat) {
    let mut user_slack = Rat::zero();
    for user in structure.all_users() {
        let current = match structure.group_of_user(user) {
            Some(gi) => ctx.eval(&structure.groups[gi]).user_payoff[&user],
            None => Rat::zero(),
        };
        let origin = structure.group_of_user(user);
        for (gi, group) in structure.groups.iter().enumerate() {
            if origin == Some(gi) {
                continue;
            }
            let gain = ctx.eval(&group.with_user(user)).user_payoff[&user] - current;
            if gain > user_slack {
                user_slack = gain;
            }
        }
    }

    let mut provider_slack = Rat::zero();
    for (gi, own) in structure.groups.iter().enumerate() {
        let own_eval = ctx.eval(own);
        for initiator in own.providers.iter().copied() {
            // merges
            for (gj, other) in structure.groups.iter().enumerate() {
                if gj == gi {
                    continue;
                }
                let merged = Group {
                    users: own.users.union(&other.users).copied().collect(),
                    providers: own.providers.union(&other.providers).copied().collect(),
                };
                let merged_eval = ctx.eval(&merged);
                let other_eval = ctx.eval(other);
                let gain = merged_eval.provider_payoff[&initiator]
                    - own_eval.provider_payoff[&initiator];
                if gain <= provider_slack {
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
                    .chain(own.providers.iter().map(|p| {
                        (
                            merged_eval.provider_payoff[p],
                            own_eval.provider_payoff[p],
                        )
                    }))
                    .chain(other.providers.iter().map(|p| {
                        (
                            merged_eval.provider_payoff[p],
                            other_eval.provider_payoff[p],
                        )
                    }))
                    .any(|(after, before)| after < before);
                if !harmed {
                    provider_slack = gain;
                }
            }

            // splits
            if own.providers.len() < 2 {
                continue;
            }
            let providers: Vec<_> = own.providers.iter().copied().collect();
            let anchor = providers[0];
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
                for &u in &own.users {
                    let link = structure.links.get(&u).copied().unwrap_or(anchor);
                    if frag_left.providers.contains(&link) {
                        frag_left.users.insert(u);
                    } else {
                        frag_right.users.insert(u);
                    }
                }
                let left_eval = ctx.eval(&frag_left);
                let right_eval = ctx.eval(&frag_right);
                let own_side = if frag_left.providers.contains(&initiator) {
                    &left_eval
                } else {
                    &right_eval
                };
                let gain = own_side.provider_payoff[&initiator]
                    - own_eval.provider_payoff[&initiator];
                if gain <= provider_slack {
                    continue;
                }
                let harmed = frag_left
                    .users
                    .iter()
                    .map(|u| (left_eval.user_payoff[u], own_eval.user_payoff[u]))
                    .chain(
                        frag_right
                            .users
                            .iter()
                            .map(|u| (right_eval.user_payoff[u], own_eval.user_payoff[u])),
                    )
                    .chain(frag_left.providers.iter().map(|p| {
                        (left_eval.provider_payoff[p], own_eval.provider_payoff[p])
                    }))
                    .chain(frag_right.providers.iter().map(|p| {
                        (right_eval.provider_payoff[p], own_eval.provider_payoff[p])
                    }))
                    .any(|(after, before)| after < before);
                if !harmed {
                    provider_slack = gain;
                }
            }
        }
    }

    (user_slack, provider_slack)
}
