//! Payment rules for cleared group allocations: kappa-blended group prices,
//! proportional per-user shares, exact-cent settlement, and the rational
//! utilities the formation game optimizes.

mod settle;
mod sheet;
mod utility;

pub use settle::{settle, verify_settlement, Settlement};
pub use sheet::{group_price, price_allocation, trading_price, PriceSheet};
pub use utility::{provider_utility, user_utility};
