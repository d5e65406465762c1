use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::DestructError;
use crate::scheduler::{CommandKind, DramGeometry, RecipeStep, Request, RowSel};
use crate::signals::VariantName;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mechanism {
    Codic,
    Rowclone,
    Lisa,
    TcgWrite,
}

impl Mechanism {
    pub const ALL: [Mechanism; 4] = [Mechanism::Codic, Mechanism::Rowclone, Mechanism::Lisa, Mechanism::TcgWrite];

    pub fn name(self) -> &'static str {
        match self {
            Mechanism::Codic => "codic",
            Mechanism::Rowclone => "rowclone",
            Mechanism::Lisa => "lisa",
            Mechanism::TcgWrite => "tcg_write",
        }
    }
}

impl fmt::Display for Mechanism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mechanism {
    type Err = DestructError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "codic" => Ok(Mechanism::Codic),
            "rowclone" => Ok(Mechanism::Rowclone),
            "lisa" | "lisa_clone" => Ok(Mechanism::Lisa),
            "tcg" | "tcg_write" => Ok(Mechanism::TcgWrite),
            _ => Err(DestructError::UnknownMechanism(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MechanismConfig {
    /// Row-buffer movement hops per LISA-clone copy.
    pub lisa_steps: u32,
    pub codic_variant: VariantName,
    /// Rows per subarray; the first row of each holds the zero source for
    /// the copy-based mechanisms.
    pub subarray_rows: u32,
}

impl Default for MechanismConfig {
    fn default() -> Self {
        Self { lisa_steps: 2, codic_variant: VariantName::DetZero, subarray_rows: 512 }
    }
}

impl MechanismConfig {
    pub fn validate(&self) -> Result<(), DestructError> {
        if self.lisa_steps == 0 {
            return Err(DestructError::Config("lisa_steps must be positive".into()));
        }
        if self.subarray_rows == 0 {
            return Err(DestructError::Config("subarray_rows must be positive".into()));
        }
        Ok(())
    }

    pub fn source_row(&self, row: u32) -> u32 {
        row - row % self.subarray_rows
    }
}

/// Commands that destroy one row.
pub fn recipe(m: Mechanism, g: &DramGeometry, cfg: &MechanismConfig) -> Arc<[RecipeStep]> {
    let src = |kind| RecipeStep { kind, row: RowSel::Source };
    let dst = RecipeStep::dest;
    let steps: Vec<RecipeStep> = match m {
        Mechanism::Codic => vec![dst(CommandKind::Codic(cfg.codic_variant))],
        Mechanism::Rowclone => {
            vec![src(CommandKind::Act), dst(CommandKind::RowcloneStep), dst(CommandKind::Pre)]
        }
        Mechanism::Lisa => std::iter::once(src(CommandKind::Act))
            .chain((0..cfg.lisa_steps).map(|_| dst(CommandKind::LisaStep)))
            .chain(std::iter::once(dst(CommandKind::Pre)))
            .collect(),
        Mechanism::TcgWrite => std::iter::once(dst(CommandKind::Act))
            .chain((0..g.lines_per_row()).map(|_| dst(CommandKind::ClflushWrite)))
            .chain(std::iter::once(dst(CommandKind::Pre)))
            .collect(),
    };
    steps.into()
}

/// One request per row, banks interleaved row by row.
pub fn plan(m: Mechanism, g: &DramGeometry, cfg: &MechanismConfig) -> Vec<Request> {
    let r = recipe(m, g, cfg);
    let banks = g.total_banks();
    (0..g.rows_per_bank)
        .flat_map(|row| (0..banks).map(move |bank| (bank, row)))
        .map(|(bank, row)| Request { bank, row, src_row: cfg.source_row(row), recipe: r.clone(), arrival: 0 })
        .collect()
}
