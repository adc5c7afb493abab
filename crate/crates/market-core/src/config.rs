//! TOML scenario files: the market instance plus engine parameters.
//!
//! ```toml
//! types = 1
//! kappa_percent = 50
//! delay_cost_cents = 1
//! migration_cost_cents = 10
//!
//! [formation]
//! max_sweeps = 20
//! history = "sweep"
//!
//! [[providers]]
//! id = 1
//! supply = [20]
//! window = [0, 8]
//! curves = [[[50, 1], [40, 15]]]   # per type: [unit_price_cents, from_n]
//!
//! [[users]]
//! id = 1
//! demand = [2]
//! length = 4
//! window = [0, 6]
//! valuation_cents = 800
//! ```

use crate::curve::PriceCurve;
use crate::market::{Bid, Market, Offer, ProviderId, UserId};
use crate::money::{Money, Rat};
use crate::time::{Slot, Window};
use crate::validate::{validate, Violation};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;
use thiserror::Error;

/// How the formation history set grows: once per sweep (all groups of the
/// current structure) or additionally after every applied decision.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum HistoryGranularity {
    #[default]
    Sweep,
    Decision,
}

/// Group-formation engine knobs.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct FormationParams {
    pub max_sweeps: usize,
    pub history: HistoryGranularity,
}

impl Default for FormationParams {
    fn default() -> Self {
        FormationParams {
            max_sweeps: 20,
            history: HistoryGranularity::Sweep,
        }
    }
}

/// Random-arrival generator parameters for simulation runs.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimulationParams {
    /// Number of slots simulated.
    pub horizon: Slot,
    /// New users per slot are drawn uniformly from 0..=this.
    pub arrival_max: u32,
    /// Per-type demand is drawn uniformly from 0..=this (all-zero vectors
    /// are redrawn).
    pub demand_max: u32,
    pub length_min: u32,
    pub length_max: u32,
    /// Window start offset from the arrival slot, inclusive bounds.
    pub start_offset_min: u32,
    pub start_offset_max: u32,
    /// Extra window slack beyond the requested length, inclusive bounds.
    pub window_slack_min: u32,
    pub window_slack_max: u32,
    /// Valuations are drawn uniformly from 0..=length * sum_k
    /// (unit_value_cents * (k+1) * demand_k).
    pub unit_value_cents: i64,
    pub default_seed: u64,
}

impl Default for SimulationParams {
    fn default() -> Self {
        SimulationParams {
            horizon: 72,
            arrival_max: 3,
            demand_max: 10,
            length_min: 1,
            length_max: 6,
            start_offset_min: 1,
            start_offset_max: 3,
            window_slack_min: 0,
            window_slack_max: 6,
            unit_value_cents: 10,
            default_seed: 1,
        }
    }
}

/// A fully parsed scenario: the market plus every engine parameter.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub market: Market,
    /// Pricing weight between user and provider valuations, in percent.
    pub kappa_percent: u32,
    pub delay_cost: Money,
    pub migration_cost: Money,
    pub formation: FormationParams,
    pub simulation: Option<SimulationParams>,
}

impl Scenario {
    pub fn kappa(&self) -> Rat {
        Rat::new(self.kappa_percent as i128, 100)
    }

    pub fn load(path: &Path) -> Result<Scenario, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Io(path.display().to_string(), e.to_string()))?;
        Scenario::from_toml_str(&text)
    }

    pub fn from_toml_str(text: &str) -> Result<Scenario, ConfigError> {
        let raw: ScenarioToml = toml::from_str(text)?;
        raw.build()
    }

    /// Canonical TOML form; reloading it yields an equal scenario.
    pub fn to_toml_string(&self) -> String {
        let raw = ScenarioToml::from_scenario(self);
        toml::to_string_pretty(&raw).expect("scenario serializes")
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {0}: {1}")]
    Io(String, String),
    #[error("cannot parse scenario: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("duplicate user id {0}")]
    DuplicateUser(u32),
    #[error("duplicate provider id {0}")]
    DuplicateProvider(u32),
    #[error("provider {provider} type {type_index}: {message}")]
    Curve {
        provider: u32,
        type_index: usize,
        message: String,
    },
    #[error("kappa_percent {0} is outside 0..=100")]
    KappaRange(u32),
    #[error("invalid market:\n{}", format_violations(.0))]
    Invalid(Vec<Violation>),
}

fn format_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(|v| format!("  {v}"))
        .collect::<Vec<_>>()
        .join("\n")
}

fn default_kappa() -> u32 {
    50
}
fn default_delay_cost() -> i64 {
    1
}
fn default_migration_cost() -> i64 {
    10
}

#[derive(Serialize, Deserialize)]
struct ScenarioToml {
    types: usize,
    #[serde(default = "default_kappa")]
    kappa_percent: u32,
    #[serde(default = "default_delay_cost")]
    delay_cost_cents: i64,
    #[serde(default = "default_migration_cost")]
    migration_cost_cents: i64,
    #[serde(default)]
    formation: FormationParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    simulation: Option<SimulationParams>,
    #[serde(default)]
    providers: Vec<ProviderToml>,
    #[serde(default)]
    users: Vec<UserToml>,
}

#[derive(Serialize, Deserialize)]
struct ProviderToml {
    id: u32,
    supply: Vec<u32>,
    window: [Slot; 2],
    /// Per type: a list of [unit_price_cents, from_n] steps.
    curves: Vec<Vec<[i64; 2]>>,
}

#[derive(Serialize, Deserialize)]
struct UserToml {
    id: u32,
    demand: Vec<u32>,
    length: u32,
    window: [Slot; 2],
    valuation_cents: i64,
    #[serde(default)]
    arrival: Slot,
}

impl ScenarioToml {
    fn build(self) -> Result<Scenario, ConfigError> {
        if self.kappa_percent > 100 {
            return Err(ConfigError::KappaRange(self.kappa_percent));
        }
        let mut providers = BTreeMap::new();
        for p in self.providers {
            let mut curves = Vec::with_capacity(p.curves.len());
            for (k, steps) in p.curves.iter().enumerate() {
                let steps: Vec<(Money, u32)> = steps
                    .iter()
                    .map(|&[price, from]| (Money(price), from as u32))
                    .collect();
                let supply = p.supply.get(k).copied().unwrap_or(0);
                let curve = PriceCurve::from_steps(&steps, supply).map_err(|message| {
                    ConfigError::Curve {
                        provider: p.id,
                        type_index: k + 1,
                        message,
                    }
                })?;
                curves.push(curve);
            }
            let offer = Offer {
                provider: ProviderId(p.id),
                supply: p.supply,
                window: Window::new(p.window[0], p.window[1]),
                curves,
            };
            if providers.insert(offer.provider, offer).is_some() {
                return Err(ConfigError::DuplicateProvider(p.id));
            }
        }
        let mut users = BTreeMap::new();
        for u in self.users {
            let bid = Bid {
                user: UserId(u.id),
                demand: u.demand,
                length: u.length,
                window: Window::new(u.window[0], u.window[1]),
                valuation: Money(u.valuation_cents),
                arrival: u.arrival,
            };
            if users.insert(bid.user, bid).is_some() {
                return Err(ConfigError::DuplicateUser(u.id));
            }
        }
        let market = Market {
            types: self.types,
            users,
            providers,
        };
        let violations = validate(&market);
        if !violations.is_empty() {
            return Err(ConfigError::Invalid(violations));
        }
        Ok(Scenario {
            market,
            kappa_percent: self.kappa_percent,
            delay_cost: Money(self.delay_cost_cents),
            migration_cost: Money(self.migration_cost_cents),
            formation: self.formation,
            simulation: self.simulation,
        })
    }

    fn from_scenario(s: &Scenario) -> ScenarioToml {
        ScenarioToml {
            types: s.market.types,
            kappa_percent: s.kappa_percent,
            delay_cost_cents: s.delay_cost.cents(),
            migration_cost_cents: s.migration_cost.cents(),
            formation: s.formation,
            simulation: s.simulation,
            providers: s
                .market
                .providers
                .values()
                .map(|o| ProviderToml {
                    id: o.provider.0,
                    supply: o.supply.clone(),
                    window: [o.window.start, o.window.end],
                    curves: o
                        .curves
                        .iter()
                        .map(|c| {
                            c.to_steps()
                                .into_iter()
                                .map(|(price, from)| [price.cents(), from as i64])
                                .collect()
                        })
                        .collect(),
                })
                .collect(),
            users: s
                .market
                .users
                .values()
                .map(|b| UserToml {
                    id: b.user.0,
                    demand: b.demand.clone(),
                    length: b.length,
                    window: [b.window.start, b.window.end],
                    valuation_cents: b.valuation.cents(),
                    arrival: b.arrival,
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
types = 1

[[providers]]
id = 1
supply = [20]
window = [0, 8]
curves = [[[50, 1], [40, 15]]]

[[users]]
id = 1
demand = [2]
length = 4
window = [0, 6]
valuation_cents = 800
"#;

    #[test]
    fn minimal_scenario_parses_with_defaults() {
        let s = Scenario::from_toml_str(MINIMAL).unwrap();
        assert_eq!(s.kappa_percent, 50);
        assert_eq!(s.kappa(), Rat::new(1, 2));
        assert_eq!(s.delay_cost, Money(1));
        assert_eq!(s.migration_cost, Money(10));
        assert_eq!(s.formation.max_sweeps, 20);
        assert_eq!(s.market.users.len(), 1);
        let offer = &s.market.providers[&ProviderId(1)];
        assert_eq!(offer.curves[0].quote(15).finite(), Some(Money(40)));
    }

    #[test]
    fn duplicate_ids_are_rejected() {
        let text = MINIMAL.to_string()
            + r#"
[[users]]
id = 1
demand = [1]
length = 1
window = [0, 2]
valuation_cents = 100
"#;
        assert!(matches!(
            Scenario::from_toml_str(&text),
            Err(ConfigError::DuplicateUser(1))
        ));
    }

    #[test]
    fn invalid_market_is_rejected_on_load() {
        let text = r#"
types = 1

[[users]]
id = 3
demand = [2]
length = 6
window = [1, 6]
valuation_cents = 2000
"#;
        match Scenario::from_toml_str(text) {
            Err(ConfigError::Invalid(v)) => {
                assert!(v[0].detail.contains("shorter than requested length"))
            }
            other => panic!("expected invalid-market error, got {other:?}"),
        }
    }

    #[test]
    fn kappa_out_of_range_is_rejected() {
        let text = MINIMAL.replace("types = 1", "types = 1\nkappa_percent = 101");
        assert!(matches!(
            Scenario::from_toml_str(&text),
            Err(ConfigError::KappaRange(101))
        ));
    }
}
