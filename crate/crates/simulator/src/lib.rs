//! Discrete-time market simulation: stochastic bid arrivals, three
//! clearing schemes over a shared arrival stream, and run statistics.

mod arrivals;
mod metrics;
mod run;

pub use arrivals::{build_stream, generate_arrivals};
pub use metrics::{aggregate, Aggregate, SchemeMetrics, SchemeSummary};
pub use run::{run_scheme, Event, EventKind, SchemeKind, SimSetup, SimulationRun};
