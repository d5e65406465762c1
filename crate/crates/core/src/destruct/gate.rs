use serde::Serialize;

use crate::scheduler::CommandKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CommandSource {
    /// Issued by the destruction operation itself.
    Internal,
    /// Any other requestor.
    External,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum GateStatus {
    Accepted,
    Rejected,
}

/// A destruction in flight over `[start_cycle, end_cycle)`. The operation is
/// atomic: nothing but its own commands reaches the module until it ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DestructionSession {
    pub start_cycle: u64,
    pub end_cycle: u64,
}

impl DestructionSession {
    pub fn new(start_cycle: u64, latency_cycles: u64) -> Self {
        Self { start_cycle, end_cycle: start_cycle + latency_cycles }
    }

    pub fn in_progress(&self, cycle: u64) -> bool {
        (self.start_cycle..self.end_cycle).contains(&cycle)
    }

    /// Fraction of the operation elapsed at `cycle`, clamped to [0, 1].
    pub fn progress(&self, cycle: u64) -> f64 {
        let len = self.end_cycle - self.start_cycle;
        if len == 0 {
            return 1.0;
        }
        (cycle.saturating_sub(self.start_cycle) as f64 / len as f64).min(1.0)
    }

    /// Cycle at a given fraction of the operation.
    pub fn cycle_at(&self, fraction: f64) -> u64 {
        let len = (self.end_cycle - self.start_cycle) as f64;
        self.start_cycle + (fraction.clamp(0.0, 1.0) * len).floor() as u64
    }
}

pub fn atomic_gate(s: &DestructionSession, cycle: u64, _kind: CommandKind, source: CommandSource) -> GateStatus {
    if source == CommandSource::External && s.in_progress(cycle) {
        GateStatus::Rejected
    } else {
        GateStatus::Accepted
    }
}
