//! Slot clock. Slot t covers the real-time period (t-1, t].

use serde::{Deserialize, Serialize};

/// Slot index.
pub type Slot = u32;

/// Half-open availability window (start, end]: usable slots are
/// start+1 ..= end.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Window {
    pub start: Slot,
    pub end: Slot,
}

impl Window {
    pub fn new(start: Slot, end: Slot) -> Window {
        Window { start, end }
    }

    pub fn contains(&self, slot: Slot) -> bool {
        self.start < slot && slot <= self.end
    }

    /// Number of usable slots.
    pub fn len(&self) -> u32 {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn slots(&self) -> impl Iterator<Item = Slot> {
        self.start + 1..=self.end
    }

    /// Restricts the window to slots strictly after `floor`.
    pub fn clamped(&self, floor: Slot) -> Window {
        Window {
            start: self.start.max(floor),
            end: self.end,
        }
    }
}
