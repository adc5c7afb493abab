//! Exact reference results for small markets: the true optimal welfare by
//! exhaustive search, and the size of the assignment space it ranges over.

mod count;
mod optimum;

pub use count::count_mappings;
pub use optimum::{enumerate_optimum, theoretical_nodes, OptimumResult, OracleError};
