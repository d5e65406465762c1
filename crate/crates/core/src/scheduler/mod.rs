//! JEDEC-constrained command scheduling, an independent trace validator and
//! per-command energy accounting.

mod check;
mod command;
mod energy;
mod engine;
mod geometry;
mod timing;

pub use check::{check_trace, Violation};
pub use command::{Command, CommandKind, CommandTrace, RecipeStep, Request, RowSel};
pub use energy::{trace_energy, EnergyParams};
pub use engine::{schedule, Engine};
pub use geometry::DramGeometry;
pub use timing::{CodicLatency, TimingParams};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SchedulerError {
    #[error("geometry: {0}")]
    Geometry(String),
    #[error("timing: {0}")]
    Timing(String),
    #[error("request targets bank {bank} row {row}, outside the geometry")]
    OutOfRange { bank: u32, row: u32 },
    #[error("request has an empty recipe")]
    EmptyRecipe,
    #[error("no energy entry for {0}")]
    MissingEnergy(String),
    #[error("bad trace line {line}: {reason}")]
    Parse { line: usize, reason: String },
}
