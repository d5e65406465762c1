use std::fmt::{self, Write as _};
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{DramGeometry, SchedulerError, TimingParams};
use crate::signals::VariantName;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CommandKind {
    Act,
    Pre,
    Wr,
    Rd,
    Codic(VariantName),
    RowcloneStep,
    LisaStep,
    ClflushWrite,
}

impl CommandKind {
    /// Commands that activate a row and therefore count toward tRRD and tFAW.
    pub fn is_activation(self) -> bool {
        matches!(self, CommandKind::Act | CommandKind::Codic(_) | CommandKind::RowcloneStep)
    }

    /// Commands that move data over the channel's data bus.
    pub fn is_column(self) -> bool {
        matches!(self, CommandKind::Rd | CommandKind::Wr | CommandKind::ClflushWrite)
    }

    pub fn is_write(self) -> bool {
        matches!(self, CommandKind::Wr | CommandKind::ClflushWrite)
    }

    /// Cycles from issue until the command's effect is complete.
    pub fn duration(self, t: &TimingParams) -> u64 {
        match self {
            CommandKind::Act => t.trcd,
            CommandKind::Pre => t.trp,
            CommandKind::Rd => t.cl + t.burst_cycles(),
            CommandKind::Wr | CommandKind::ClflushWrite => t.write_recovery(),
            CommandKind::Codic(v) => t.codic_rc(v),
            CommandKind::RowcloneStep => t.tras,
            CommandKind::LisaStep => t.lisa_hop,
        }
    }
}

impl fmt::Display for CommandKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CommandKind::Act => f.write_str("ACT"),
            CommandKind::Pre => f.write_str("PRE"),
            CommandKind::Wr => f.write_str("WR"),
            CommandKind::Rd => f.write_str("RD"),
            CommandKind::Codic(v) => write!(f, "CODIC_{}", v.name().to_ascii_uppercase()),
            CommandKind::RowcloneStep => f.write_str("ROWCLONE_STEP"),
            CommandKind::LisaStep => f.write_str("LISA_STEP"),
            CommandKind::ClflushWrite => f.write_str("CLFLUSH_WRITE"),
        }
    }
}

impl FromStr for CommandKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "ACT" => CommandKind::Act,
            "PRE" => CommandKind::Pre,
            "WR" => CommandKind::Wr,
            "RD" => CommandKind::Rd,
            "ROWCLONE_STEP" => CommandKind::RowcloneStep,
            "LISA_STEP" => CommandKind::LisaStep,
            "CLFLUSH_WRITE" => CommandKind::ClflushWrite,
            other => match other.strip_prefix("CODIC_") {
                Some(v) => CommandKind::Codic(v.parse().map_err(|_| format!("unknown command `{s}`"))?),
                None => return Err(format!("unknown command `{s}`")),
            },
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Command {
    pub kind: CommandKind,
    /// Flat bank index across channels and ranks.
    pub bank: u32,
    pub row: u32,
    pub issue_cycle: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RowSel {
    Dest,
    Source,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RecipeStep {
    pub kind: CommandKind,
    pub row: RowSel,
}

impl RecipeStep {
    pub const fn dest(kind: CommandKind) -> Self {
        Self { kind, row: RowSel::Dest }
    }
}

/// An in-order group of commands for one bank; nothing of it issues before
/// `arrival`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Request {
    pub bank: u32,
    pub row: u32,
    pub src_row: u32,
    pub recipe: Arc<[RecipeStep]>,
    pub arrival: u64,
}

impl Request {
    pub fn new(bank: u32, row: u32, recipe: Arc<[RecipeStep]>) -> Self {
        Self { bank, row, src_row: row, recipe, arrival: 0 }
    }

    pub fn row_for(&self, step: &RecipeStep) -> u32 {
        match step.row {
            RowSel::Dest => self.row,
            RowSel::Source => self.src_row,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommandTrace {
    pub geometry: DramGeometry,
    pub timings: TimingParams,
    pub commands: Vec<Command>,
}

impl CommandTrace {
    pub fn new(geometry: DramGeometry, timings: TimingParams) -> Self {
        Self { geometry, timings, commands: Vec::new() }
    }

    /// Cycle at which the last command's effect completes; 0 when empty.
    pub fn completion_cycle(&self) -> u64 {
        self.commands.iter().map(|c| c.issue_cycle + c.kind.duration(&self.timings)).max().unwrap_or(0)
    }

    pub fn completion_ns(&self) -> f64 {
        self.timings.cycles_to_ns(self.completion_cycle())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("cycle,kind,bank,row\n");
        for c in &self.commands {
            let _ = writeln!(out, "{},{},{},{}", c.issue_cycle, c.kind, c.bank, c.row);
        }
        out
    }

    pub fn parse_csv(text: &str, geometry: DramGeometry, timings: TimingParams) -> Result<Self, SchedulerError> {
        let mut t = Self::new(geometry, timings);
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (i == 0 && line.starts_with("cycle")) {
                continue;
            }
            let bad = |reason: String| SchedulerError::Parse { line: i + 1, reason };
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 4 {
                return Err(bad("expected cycle,kind,bank,row".into()));
            }
            let num = |s: &str| s.trim().parse::<u64>().map_err(|_| bad(format!("`{s}` is not a number")));
            t.commands.push(Command {
                issue_cycle: num(f[0])?,
                kind: f[1].trim().parse().map_err(bad)?,
                bank: u32::try_from(num(f[2])?).map_err(|_| bad("bank too large".into()))?,
                row: u32::try_from(num(f[3])?).map_err(|_| bad("row too large".into()))?,
            });
        }
        Ok(t)
    }
}
