//! Greedy slot-by-slot clearing for a group of users and providers.
//!
//! The pass ranks slots by contention, users by per-slot valuation, and
//! builds per-slot sub-groups that share a provider's volume discount.
//! A sub-group admits a user only when the provider's bundle cost stays
//! within the sub-group's combined per-slot valuation, so the final
//! allocation always covers its own cost.

mod alloc;
mod greedy;
mod welfare;

pub use alloc::{Allocation, AssignedSlots};
pub use greedy::find_instance_allocation;
pub use welfare::{
    check_constraints, count_vector, demand_period, social_welfare, ConstraintViolation,
};

use market_core::{Bid, Offer, ProviderId, UserId};
use std::collections::BTreeMap;

/// Borrowed lookup of a group's bids by user id.
pub type BidMap<'a> = BTreeMap<UserId, &'a Bid>;
/// Borrowed lookup of a group's offers by provider id.
pub type OfferMap<'a> = BTreeMap<ProviderId, &'a Offer>;

pub fn bid_map<'a>(bids: impl IntoIterator<Item = &'a Bid>) -> BidMap<'a> {
    bids.into_iter().map(|b| (b.user, b)).collect()
}

pub fn offer_map<'a>(offers: impl IntoIterator<Item = &'a Offer>) -> OfferMap<'a> {
    offers.into_iter().map(|o| (o.provider, o)).collect()
}
