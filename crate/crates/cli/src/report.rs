//! Structured run reports and the scenario fingerprint that keys them.

use market_core::Scenario;
use serde::Serialize;
use sha2::{Digest, Sha256};
use simulator::SimulationRun;
use std::collections::BTreeMap;

/// Stable hash of the canonical scenario form; reloading an exported
/// scenario yields the same value.
pub fn scenario_fingerprint(scenario: &Scenario) -> String {
    let mut hasher = Sha256::new();
    hasher.update(scenario.to_toml_string().as_bytes());
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// One simulated run, ready to serialize. Elapsed time is kept out of the
/// serialized form so reports from identical seeds stay byte-identical.
#[derive(Serialize)]
pub struct RunReport {
    pub scenario_fingerprint: String,
    pub seed: u64,
    pub scheme: String,
    pub metrics: MetricsReport,
    /// Cumulative executed welfare after each execution.
    pub welfare_trace: Vec<TracePoint>,
    pub settlement: SettlementSummary,
    #[serde(skip)]
    pub elapsed_ms: u128,
}

#[derive(Serialize)]
pub struct TracePoint {
    pub slot: u32,
    pub cumulative_welfare_cents: i64,
}

#[derive(Serialize)]
pub struct MetricsReport {
    pub arrived_count: usize,
    pub winners_count: usize,
    pub losers_count: usize,
    pub unresolved_count: usize,
    pub acceptance_rate_ratio: f64,
    pub utilization_ratio: f64,
    pub avg_payment_cents: f64,
    pub executed_welfare_cents: i64,
}

#[derive(Serialize)]
pub struct SettlementSummary {
    pub total_payments_cents: i64,
    pub provider_revenue_cents: BTreeMap<String, i64>,
    pub balanced: bool,
}

impl RunReport {
    pub fn from_run(
        fingerprint: &str,
        seed: u64,
        run: &SimulationRun,
        elapsed_ms: u128,
    ) -> RunReport {
        let m = &run.metrics;
        let revenue: BTreeMap<String, i64> = m
            .provider_revenue
            .iter()
            .map(|(p, money)| (p.0.to_string(), money.cents()))
            .collect();
        let revenue_total: i64 = revenue.values().sum();
        RunReport {
            scenario_fingerprint: fingerprint.to_string(),
            seed,
            scheme: run.scheme.label().to_string(),
            metrics: MetricsReport {
                arrived_count: m.arrived,
                winners_count: m.winners,
                losers_count: m.losers,
                unresolved_count: m.unresolved,
                acceptance_rate_ratio: m.acceptance_rate(),
                utilization_ratio: m.utilization(),
                avg_payment_cents: m.avg_payment_cents(),
                executed_welfare_cents: m.executed_welfare.cents(),
            },
            welfare_trace: run
                .welfare_trace
                .iter()
                .map(|&(slot, welfare)| TracePoint {
                    slot,
                    cumulative_welfare_cents: welfare.cents(),
                })
                .collect(),
            settlement: SettlementSummary {
                total_payments_cents: m.total_payments.cents(),
                provider_revenue_cents: revenue,
                balanced: m.total_payments.cents() == revenue_total,
            },
            elapsed_ms,
        }
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("report serializes");
        out.push('\n');
        out
    }
}
