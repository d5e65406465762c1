//! Bulk data destruction: per-mechanism row recipes, destruction latency
//! and energy across module capacities, the atomicity gate, and replay of
//! secure-deallocation traces.

mod dealloc;
mod gate;
mod latency;
mod plan;

pub use dealloc::{replay_dealloc, DeallocEvent, DeallocTrace, ReplayResult};
pub use gate::{atomic_gate, CommandSource, DestructionSession, GateStatus};
pub use latency::{
    destruction_energy, destruction_latency, destruction_trace, parse_capacities, run_destruction, sweep, sweep_csv,
    DestructionReport, RunMode, RunSummary,
};
pub use plan::{plan, recipe, Mechanism, MechanismConfig};

use thiserror::Error;

use crate::scheduler::SchedulerError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DestructError {
    #[error("unknown mechanism `{0}`")]
    UnknownMechanism(String),
    #[error("bad capacity `{0}`")]
    Capacity(String),
    #[error("dealloc trace line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("mechanism config: {0}")]
    Config(String),
    #[error(transparent)]
    Scheduler(#[from] SchedulerError),
}
