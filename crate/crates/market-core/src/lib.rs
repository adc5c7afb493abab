//! Core data model for a slotted cloud-instance market.
//!
//! Everything downstream (clearing, pricing, group formation, simulation)
//! builds on the types here:
//!
//! - [`Money`] integer cents and [`Rat`] exact rationals
//! - [`Window`] half-open slot windows (start, end]
//! - [`PriceCurve`] volume-discount schedules with [`Quote`] lookups
//! - [`Bid`] / [`Offer`] / [`Market`] participants
//! - [`SupplySchedule`] remaining per-slot capacity
//! - [`Scenario`] TOML configs and [`validate`] input checking

pub mod config;
pub mod curve;
pub mod market;
pub mod money;
pub mod supply;
pub mod time;
pub mod validate;

pub use config::{
    ConfigError, FormationParams, HistoryGranularity, Scenario, SimulationParams,
};
pub use curve::{PriceCurve, Quote};
pub use market::{Bid, Market, Offer, ProviderId, UserId};
pub use money::{floor_cents, rat_to_f64, Money, Rat};
pub use supply::SupplySchedule;
pub use time::{Slot, Window};
pub use validate::{validate, Violation};
