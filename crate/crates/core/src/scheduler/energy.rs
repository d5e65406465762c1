use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{CommandKind, CommandTrace, SchedulerError};
use crate::signals::VariantName;

/// Nanojoules per command. CODIC energies include the implicit precharge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnergyParams {
    pub act_nj: Option<f64>,
    pub pre_nj: Option<f64>,
    pub rd_nj: Option<f64>,
    pub wr_nj: Option<f64>,
    pub rowclone_step_nj: Option<f64>,
    pub lisa_step_nj: Option<f64>,
    pub clflush_write_nj: Option<f64>,
    pub codic: BTreeMap<VariantName, f64>,
}

impl Default for EnergyParams {
    fn default() -> Self {
        let codic = VariantName::ALL
            .into_iter()
            .map(|v| (v, if v == VariantName::Activate { 17.3 } else { 17.2 }))
            .collect();
        Self {
            act_nj: Some(11.9),
            pre_nj: Some(5.4),
            rd_nj: Some(5.0),
            wr_nj: Some(5.47),
            rowclone_step_nj: Some(11.9),
            lisa_step_nj: Some(12.85),
            clflush_write_nj: Some(5.47),
            codic,
        }
    }
}

impl EnergyParams {
    pub fn empty() -> Self {
        Self {
            act_nj: None,
            pre_nj: None,
            rd_nj: None,
            wr_nj: None,
            rowclone_step_nj: None,
            lisa_step_nj: None,
            clflush_write_nj: None,
            codic: BTreeMap::new(),
        }
    }

    pub fn get(&self, k: CommandKind) -> Result<f64, SchedulerError> {
        let v = match k {
            CommandKind::Act => self.act_nj,
            CommandKind::Pre => self.pre_nj,
            CommandKind::Rd => self.rd_nj,
            CommandKind::Wr => self.wr_nj,
            CommandKind::RowcloneStep => self.rowclone_step_nj,
            CommandKind::LisaStep => self.lisa_step_nj,
            CommandKind::ClflushWrite => self.clflush_write_nj,
            CommandKind::Codic(v) => self.codic.get(&v).copied(),
        };
        match v {
            Some(e) if e.is_finite() && e >= 0.0 => Ok(e),
            Some(_) => Err(SchedulerError::MissingEnergy(format!("{k} (negative or not finite)"))),
            None => Err(SchedulerError::MissingEnergy(k.to_string())),
        }
    }

    /// Energy of a multiset of commands.
    pub fn total<'a>(&self, counts: impl IntoIterator<Item = (&'a CommandKind, &'a u64)>) -> Result<f64, SchedulerError> {
        counts.into_iter().try_fold(0.0, |acc, (k, &n)| Ok(acc + self.get(*k)? * n as f64))
    }
}

pub fn trace_energy(trace: &CommandTrace, energy: &EnergyParams) -> Result<f64, SchedulerError> {
    let mut counts: BTreeMap<CommandKind, u64> = BTreeMap::new();
    for c in &trace.commands {
        *counts.entry(c.kind).or_default() += 1;
    }
    energy.total(&counts)
}
