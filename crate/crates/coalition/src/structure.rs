//! Groups, group fingerprints, and the partition of a market's participants.

use market_core::{ProviderId, UserId};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Canonical identity of a group: its member sets, order-free.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct GroupKey {
    pub users: BTreeSet<UserId>,
    pub providers: BTreeSet<ProviderId>,
}

impl fmt::Display for GroupKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, u) in self.users.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{u}")?;
        }
        write!(f, "|")?;
        for (i, p) in self.providers.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "}}")
    }
}

/// One trading group: a set of users served by a set of providers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Group {
    pub users: BTreeSet<UserId>,
    pub providers: BTreeSet<ProviderId>,
}

impl Group {
    pub fn new(providers: impl IntoIterator<Item = ProviderId>) -> Self {
        Group {
            users: BTreeSet::new(),
            providers: providers.into_iter().collect(),
        }
    }

    pub fn key(&self) -> GroupKey {
        GroupKey {
            users: self.users.clone(),
            providers: self.providers.clone(),
        }
    }

    /// The group's identity for ordering: its lowest provider id.
    pub fn anchor(&self) -> ProviderId {
        *self.providers.iter().next().expect("group without providers")
    }

    /// A copy with one extra user.
    pub fn with_user(&self, user: UserId) -> Group {
        let mut g = self.clone();
        g.users.insert(user);
        g
    }
}

/// A full partition: provider groups, the providerless waiting pool, and
/// the user-to-provider links that steer splits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupStructure {
    pub waiting: BTreeSet<UserId>,
    pub groups: Vec<Group>,
    pub links: BTreeMap<UserId, ProviderId>,
}

impl GroupStructure {
    pub fn new(groups: Vec<Group>) -> Self {
        let mut s = GroupStructure {
            waiting: BTreeSet::new(),
            groups,
            links: BTreeMap::new(),
        };
        s.canonicalize();
        s
    }

    /// Keep groups sorted by their lowest provider so indices are stable
    /// across runs.
    pub fn canonicalize(&mut self) {
        self.groups.sort_by_key(|g| g.anchor());
    }

    /// Index of the group containing a user, if any.
    pub fn group_of_user(&self, user: UserId) -> Option<usize> {
        self.groups.iter().position(|g| g.users.contains(&user))
    }

    /// Index of the group containing a provider.
    pub fn group_of_provider(&self, provider: ProviderId) -> Option<usize> {
        self.groups.iter().position(|g| g.providers.contains(&provider))
    }

    /// Every user known to the structure.
    pub fn all_users(&self) -> BTreeSet<UserId> {
        let mut ids = self.waiting.clone();
        for g in &self.groups {
            ids.extend(g.users.iter().copied());
        }
        ids
    }

    /// Canonical one-line fingerprint of the whole partition.
    pub fn fingerprint(&self) -> String {
        let mut out = String::from("w{");
        for (i, u) in self.waiting.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&u.to_string());
        }
        out.push('}');
        for g in &self.groups {
            out.push(' ');
            out.push_str(&g.key().to_string());
        }
        out
    }
}

impl fmt::Display for GroupStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.fingerprint())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn groups_sort_by_lowest_provider() {
        let mut s = GroupStructure::new(vec![
            Group::new([ProviderId(3)]),
            Group::new([ProviderId(1), ProviderId(4)]),
        ]);
        s.canonicalize();
        assert_eq!(s.groups[0].anchor(), ProviderId(1));
        assert_eq!(s.groups[1].anchor(), ProviderId(3));
    }

    #[test]
    fn fingerprints_are_membership_only() {
        let mut a = Group::new([ProviderId(1)]);
        a.users.insert(UserId(2));
        a.users.insert(UserId(1));
        let mut b = Group::new([ProviderId(1)]);
        b.users.insert(UserId(1));
        b.users.insert(UserId(2));
        assert_eq!(a.key(), b.key());
        assert_eq!(a.key().to_string(), "{u1,u2|p1}");
    }
}
