use std::sync::Arc;

use serde::Serialize;

use super::{recipe, DestructError, Mechanism, MechanismConfig};
use crate::scheduler::{schedule, trace_energy, CommandKind, DramGeometry, EnergyParams, RecipeStep, Request, TimingParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DeallocEvent {
    /// Rows released by software; each must be destroyed before reuse.
    Free { bank: u32, row_start: u32, row_count: u32 },
    /// A demand read of `row` arriving at `cycle`.
    Demand { bank: u32, row: u32, cycle: u64 },
}

/// Line format: `FREE <bank> <row_start> <row_count>` or
/// `DEMAND <bank> <row> <cycle>`. Blank lines and `#` comments are skipped.
/// A FREE takes effect at the cycle of the preceding event (0 at the start).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct DeallocTrace {
    pub events: Vec<DeallocEvent>,
}

impl DeallocTrace {
    pub fn parse(text: &str) -> Result<Self, DestructError> {
        let mut events = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |reason: String| DestructError::Parse { line: i + 1, reason };
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 4 {
                return Err(bad("expected 4 fields".into()));
            }
            let n = |s: &str| s.parse::<u64>().map_err(|_| bad(format!("`{s}` is not a non-negative integer")));
            let n32 = |s: &str| n(s).and_then(|v| u32::try_from(v).map_err(|_| bad(format!("`{s}` is too large"))));
            let ev = match f[0].to_ascii_uppercase().as_str() {
                "FREE" => DeallocEvent::Free { bank: n32(f[1])?, row_start: n32(f[2])?, row_count: n32(f[3])? },
                "DEMAND" => DeallocEvent::Demand { bank: n32(f[1])?, row: n32(f[2])?, cycle: n(f[3])? },
                other => return Err(bad(format!("unknown event `{other}`"))),
            };
            events.push(ev);
        }
        Ok(Self { events })
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for e in &self.events {
            match *e {
                DeallocEvent::Free { bank, row_start, row_count } => {
                    s.push_str(&format!("FREE {bank} {row_start} {row_count}\n"))
                }
                DeallocEvent::Demand { bank, row, cycle } => s.push_str(&format!("DEMAND {bank} {row} {cycle}\n")),
            }
        }
        s
    }

    /// Requests in trace order with their arrival cycles.
    pub fn requests(&self, m: Mechanism, g: &DramGeometry, cfg: &MechanismConfig) -> Result<Vec<Request>, DestructError> {
        let destroy = recipe(m, g, cfg);
        let read: Arc<[RecipeStep]> =
            [CommandKind::Act, CommandKind::Rd, CommandKind::Pre].map(RecipeStep::dest).into();
        let range = |bank: u32, row: u64| {
            if bank >= g.total_banks() || row >= g.rows_per_bank as u64 {
                Err(DestructError::Scheduler(crate::scheduler::SchedulerError::OutOfRange { bank, row: row as u32 }))
            } else {
                Ok(())
            }
        };
        let mut at = 0u64;
        let mut out = Vec::new();
        for e in &self.events {
            match *e {
                DeallocEvent::Free { bank, row_start, row_count } => {
                    if row_count > 0 {
                        range(bank, row_start as u64 + row_count as u64 - 1)?;
                    }
                    for row in row_start..row_start + row_count {
                        out.push(Request { bank, row, src_row: cfg.source_row(row), recipe: destroy.clone(), arrival: at });
                    }
                }
                DeallocEvent::Demand { bank, row, cycle } => {
                    range(bank, row as u64)?;
                    at = cycle;
                    out.push(Request { bank, row, src_row: row, recipe: read.clone(), arrival: cycle });
                }
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReplayResult {
    pub cycles: u64,
    pub energy_nj: f64,
}

/// Schedules a deallocation trace and reports its completion cycle and
/// total energy. An empty trace costs nothing.
pub fn replay_dealloc(
    trace: &DeallocTrace,
    m: Mechanism,
    g: &DramGeometry,
    t: &TimingParams,
    e: &EnergyParams,
    cfg: &MechanismConfig,
) -> Result<ReplayResult, DestructError> {
    cfg.validate()?;
    let reqs = trace.requests(m, g, cfg)?;
    let tr = schedule(reqs, *g, *t)?;
    Ok(ReplayResult { cycles: tr.completion_cycle(), energy_nj: trace_energy(&tr, e)? })
}
