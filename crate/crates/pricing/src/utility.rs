//! Rational trade utilities before formation penalties.

use crate::sheet::PriceSheet;
use allocation::{Allocation, BidMap};
use market_core::{ProviderId, Rat, UserId};
use num_traits::Zero;

/// Winner's valuation minus its rational charge; zero for losers.
pub fn user_utility(user: UserId, bids: &BidMap, alloc: &Allocation, sheet: &PriceSheet) -> Rat {
    if !alloc.is_winner(user) {
        return Rat::zero();
    }
    bids[&user].valuation.to_rat() - sheet.user_charge(user)
}

/// Routed revenue minus bundle costs for one provider.
pub fn provider_utility(provider: ProviderId, sheet: &PriceSheet) -> Rat {
    sheet.provider_revenue(provider) - sheet.provider_cost(provider).to_rat()
}
