//! Stochastic bid generation, one batch per slot.

use market_core::{Bid, Money, SimulationParams, Slot, UserId, Window};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

/// Draw the bids arriving during one slot. Ids are assigned from
/// `first_id` upward in draw order.
pub fn generate_arrivals(
    params: &SimulationParams,
    types: usize,
    slot: Slot,
    first_id: u32,
    rng: &mut impl Rng,
) -> Vec<Bid> {
    let count = rng.gen_range(0..=params.arrival_max);
    (0..count)
        .map(|i| {
            // all-zero demand carries no request; redraw
            let mut demand = vec![0u32; types];
            while demand.iter().all(|&d| d == 0) {
                for d in demand.iter_mut() {
                    *d = rng.gen_range(0..=params.demand_max);
                }
            }
            let length = rng.gen_range(params.length_min..=params.length_max);
            let start =
                slot + rng.gen_range(params.start_offset_min..=params.start_offset_max);
            let end = start + length + rng.gen_range(params.window_slack_min..=params.window_slack_max);

            // valuation capped by length times the per-slot unit worth,
            // where type k is worth k times the base unit
            let cap: i64 = demand
                .iter()
                .enumerate()
                .map(|(k, &d)| (k as i64 + 1) * params.unit_value_cents * i64::from(d))
                .sum::<i64>()
                * i64::from(length);
            let valuation = Money(rng.gen_range(0..=cap));

            Bid {
                user: UserId(first_id + i),
                demand,
                length,
                window: Window::new(start, end),
                valuation,
                arrival: slot,
            }
        })
        .collect()
}

/// The full arrival stream for one seeded run: `stream[t - 1]` holds the
/// bids arriving during slot `t`. All schemes of a comparison consume the
/// same stream.
pub fn build_stream(params: &SimulationParams, types: usize, seed: u64) -> Vec<Vec<Bid>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut next_id = 1u32;
    (1..=params.horizon)
        .map(|slot| {
            let batch = generate_arrivals(params, types, slot, next_id, &mut rng);
            next_id += batch.len() as u32;
            batch
        })
        .collect()
}
