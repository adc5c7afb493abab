//! The result of a clearing pass.

use market_core::{ProviderId, Slot, UserId};
use std::collections::BTreeMap;
use std::fmt;

/// A winner's served slots: slot -> serving provider.
pub type AssignedSlots = BTreeMap<Slot, ProviderId>;

/// All-or-nothing outcome of one clearing pass: every user present is a
/// winner served for exactly its requested length; losers are absent.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Allocation {
    cells: BTreeMap<UserId, AssignedSlots>,
}

impl Allocation {
    pub fn new() -> Allocation {
        Allocation::default()
    }

    pub fn insert(&mut self, user: UserId, slot: Slot, provider: ProviderId) {
        self.cells.entry(user).or_default().insert(slot, provider);
    }

    pub fn remove_user(&mut self, user: UserId) {
        self.cells.remove(&user);
    }

    pub fn is_winner(&self, user: UserId) -> bool {
        self.cells.contains_key(&user)
    }

    pub fn winners(&self) -> impl Iterator<Item = UserId> + '_ {
        self.cells.keys().copied()
    }

    pub fn winner_count(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn slots_of(&self, user: UserId) -> Option<&AssignedSlots> {
        self.cells.get(&user)
    }

    pub fn iter(&self) -> impl Iterator<Item = (UserId, &AssignedSlots)> + '_ {
        self.cells.iter().map(|(u, s)| (*u, s))
    }

    /// Earliest served slot: the moment the allocation must execute.
    pub fn bid_closing_time(&self) -> Option<Slot> {
        self.cells
            .values()
            .flat_map(|slots| slots.keys().copied())
            .min()
    }

    /// Users grouped by the (provider, slot) cell serving them.
    pub fn cell_users(&self) -> BTreeMap<(ProviderId, Slot), Vec<UserId>> {
        let mut out: BTreeMap<(ProviderId, Slot), Vec<UserId>> = BTreeMap::new();
        for (&user, slots) in &self.cells {
            for (&slot, &provider) in slots {
                out.entry((provider, slot)).or_default().push(user);
            }
        }
        out
    }

    /// CSV of (user, slot, provider) triples in deterministic order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("user,slot,provider\n");
        for (user, slots) in &self.cells {
            for (slot, provider) in slots {
                out.push_str(&format!("{},{},{}\n", user.0, slot, provider.0));
            }
        }
        out
    }
}

impl fmt::Display for Allocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.cells.is_empty() {
            return write!(f, "(empty)");
        }
        for (user, slots) in &self.cells {
            let parts: Vec<String> = slots
                .iter()
                .map(|(slot, provider)| format!("{slot}@{provider}"))
                .collect();
            writeln!(f, "{user}: {}", parts.join(" "))?;
        }
        Ok(())
    }
}
