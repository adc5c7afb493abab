//! Starting structures for the dynamics.

use crate::structure::{Group, GroupStructure};
use market_core::Market;
use rand::Rng;

/// One singleton group per provider, every user in the waiting pool.
pub fn all_waiting(market: &Market) -> GroupStructure {
    let groups = market.providers.keys().map(|&p| Group::new([p])).collect();
    let mut s = GroupStructure::new(groups);
    s.waiting = market.users.keys().copied().collect();
    s
}

/// One singleton group per provider, each user placed uniformly at random
/// into one of them.
pub fn random_structure(market: &Market, rng: &mut impl Rng) -> GroupStructure {
    let providers: Vec<_> = market.providers.keys().copied().collect();
    let mut groups: Vec<Group> = providers.iter().map(|&p| Group::new([p])).collect();
    for &user in market.users.keys() {
        let pick = rng.gen_range(0..groups.len());
        groups[pick].users.insert(user);
    }
    GroupStructure::new(groups)
}
