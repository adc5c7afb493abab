//! The coalition layer: group structures over a market, payoffs with delay
//! and migration penalties, the migrate/merge/split dynamics with a history
//! set, and Nash-stability measurement.

mod formation;
mod init;
mod payoff;
mod stability;
mod structure;

pub use formation::{
    find_group_structure, structure_welfare, DecisionRecord, FormationOutcome, SweepRecord,
};
pub use init::{all_waiting, random_structure};
pub use payoff::{delay_penalty, migration_cells, EvalContext, GroupEval};
pub use stability::epsilon_star;
pub use structure::{Group, GroupKey, GroupStructure};
