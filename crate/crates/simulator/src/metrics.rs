//! Per-run counters and cross-run statistics.

use market_core::{Money, ProviderId};
use std::collections::BTreeMap;

/// Final counters of one simulated run.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeMetrics {
    pub arrived: usize,
    /// Users whose allocation executed.
    pub winners: usize,
    /// Users whose deadline elapsed with nothing executed.
    pub losers: usize,
    /// Users still undecided when the run ended.
    pub unresolved: usize,
    /// Executed instance-slots inside the horizon, per type.
    pub allocated_per_type: Vec<u64>,
    /// Offered instance-slots inside the horizon, per type.
    pub supplied_per_type: Vec<u64>,
    pub provider_revenue: BTreeMap<ProviderId, Money>,
    pub total_payments: Money,
    /// Value minus cost over executed allocations.
    pub executed_welfare: Money,
}

impl SchemeMetrics {
    pub fn new(types: usize) -> SchemeMetrics {
        SchemeMetrics {
            arrived: 0,
            winners: 0,
            losers: 0,
            unresolved: 0,
            allocated_per_type: vec![0; types],
            supplied_per_type: vec![0; types],
            provider_revenue: BTreeMap::new(),
            total_payments: Money::ZERO,
            executed_welfare: Money::ZERO,
        }
    }

    /// Fraction of offered instance-slots actually served, in [0, 1].
    pub fn utilization(&self) -> f64 {
        let supplied: u64 = self.supplied_per_type.iter().sum();
        if supplied == 0 {
            return 0.0;
        }
        let allocated: u64 = self.allocated_per_type.iter().sum();
        allocated as f64 / supplied as f64
    }

    /// Winners over resolved users, in [0, 1].
    pub fn acceptance_rate(&self) -> f64 {
        let resolved = self.winners + self.losers;
        if resolved == 0 {
            return 0.0;
        }
        self.winners as f64 / resolved as f64
    }

    /// Mean settled payment per winner, in cents.
    pub fn avg_payment_cents(&self) -> f64 {
        if self.winners == 0 {
            return 0.0;
        }
        self.total_payments.0 as f64 / self.winners as f64
    }

    pub fn total_revenue(&self) -> Money {
        self.provider_revenue.values().copied().sum()
    }
}

/// Mean and sample standard deviation of one metric across runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aggregate {
    pub mean: f64,
    pub stddev: f64,
}

/// Sample statistics (n - 1 denominator); a single value has deviation 0.
pub fn aggregate(values: &[f64]) -> Aggregate {
    if values.is_empty() {
        return Aggregate {
            mean: 0.0,
            stddev: 0.0,
        };
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let stddev = if values.len() < 2 {
        0.0
    } else {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    Aggregate { mean, stddev }
}

/// Aggregated view over the runs of one scheme.
#[derive(Debug, Clone)]
pub struct SchemeSummary {
    pub runs: usize,
    pub winners: Aggregate,
    pub losers: Aggregate,
    pub acceptance_rate: Aggregate,
    pub utilization: Aggregate,
    pub avg_payment_cents: Aggregate,
    pub total_revenue_cents: Aggregate,
    pub executed_welfare_cents: Aggregate,
}

impl SchemeSummary {
    pub fn from_runs(runs: &[SchemeMetrics]) -> SchemeSummary {
        let pick = |f: &dyn Fn(&SchemeMetrics) -> f64| {
            aggregate(&runs.iter().map(f).collect::<Vec<_>>())
        };
        SchemeSummary {
            runs: runs.len(),
            winners: pick(&|m| m.winners as f64),
            losers: pick(&|m| m.losers as f64),
            acceptance_rate: pick(&|m| m.acceptance_rate()),
            utilization: pick(&|m| m.utilization()),
            avg_payment_cents: pick(&|m| m.avg_payment_cents()),
            total_revenue_cents: pick(&|m| m.total_revenue().0 as f64),
            executed_welfare_cents: pick(&|m| m.executed_welfare.0 as f64),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_sample_has_zero_deviation() {
        let a = aggregate(&[4.0]);
        assert_eq!(a.mean, 4.0);
        assert_eq!(a.stddev, 0.0);
    }

    #[test]
    fn sample_deviation_uses_the_unbiased_denominator() {
        let a = aggregate(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]);
        assert!((a.mean - 5.0).abs() < 1e-12);
        // sum of squared deviations 32, over n-1 = 7
        assert!((a.stddev - (32.0f64 / 7.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn empty_counters_yield_zero_rates() {
        let m = SchemeMetrics::new(3);
        assert_eq!(m.utilization(), 0.0);
        assert_eq!(m.acceptance_rate(), 0.0);
        assert_eq!(m.avg_payment_cents(), 0.0);
    }
}
