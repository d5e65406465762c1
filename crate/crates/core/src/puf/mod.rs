//! Challenge-response PUF built on the SIG then ACTIVATE sequence.
//!
//! A cell whose sense amplifier offset beats the calibrated imbalance reads
//! the minority value after its charge has been erased to vdd/2; the set of
//! such cells in a segment is the response.

mod eval_time;
mod quality;
mod response;
mod subarray;

pub use eval_time::{eval_time, EvalTimeModel, PufMechanism};
pub use quality::{
    far_frr_experiment, histogram, histogram_csv, intra_inter_distributions, median, temperature_intra, FarFrr, HistogramBin,
    JaccardDistributions,
};
pub use response::{authenticate, jaccard, AuthDecision, PufResponse};
pub use subarray::{build_subarray, respond, respond_with, Candidate, ReadConditions, SubarrayModel};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::variation::{VariationError, VariationModel};

/// Bytes per row; challenges are row aligned.
pub const ROW_BYTES: u64 = 8192;
pub const SEGMENT_BYTES: u64 = 8192;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PufError {
    #[error("subarray needs at least one {row_bytes}-byte row and a whole number of rows, got {n_cells} cells")]
    CellCount { n_cells: u64, row_bytes: u64 },
    #[error("challenge [{base}, {base}+{size} bytes) is not row aligned or exceeds {n_cells} cells")]
    Challenge { base: u64, size: u64, n_cells: u64 },
    #[error("filter threshold {threshold} must lie in 1..={n_reads}")]
    Filter { n_reads: u32, threshold: u32 },
    #[error("calibration parameter `{0}` is out of range")]
    Calibration(&'static str),
    #[error("offset drift of {drift_v} V exceeds the {margin_v} V candidate margin")]
    Drift { drift_v: f64, margin_v: f64 },
    #[error("need at least {need} segments, subarray has {have}")]
    TooFewSegments { need: u64, have: u64 },
    #[error("unknown PUF mechanism `{0}`")]
    UnknownMechanism(String),
    #[error("response file line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error(transparent)]
    Variation(#[from] VariationError),
}

/// A memory segment to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Challenge {
    /// First cell of the segment.
    pub segment_base: u64,
    pub segment_size: u64,
}

impl Challenge {
    pub fn segment(index: u64, segment_size: u64) -> Self {
        Self { segment_base: index * segment_size * 8, segment_size }
    }

    pub fn cells(&self) -> u64 {
        self.segment_size * 8
    }
}

/// Reads per evaluation and how many of them must flip for a cell to count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterPolicy {
    pub n_reads: u32,
    pub threshold: u32,
}

impl FilterPolicy {
    pub fn new(n_reads: u32, threshold: u32) -> Result<Self, PufError> {
        if threshold == 0 || threshold > n_reads {
            return Err(PufError::Filter { n_reads, threshold });
        }
        Ok(Self { n_reads, threshold })
    }

    pub const UNFILTERED: FilterPolicy = FilterPolicy { n_reads: 1, threshold: 1 };
    pub const CODIC: FilterPolicy = FilterPolicy { n_reads: 5, threshold: 5 };
    pub const LATENCY_PUF: FilterPolicy = FilterPolicy { n_reads: 100, threshold: 91 };

    pub fn validate(&self) -> Result<(), PufError> {
        Self::new(self.n_reads, self.threshold).map(|_| ())
    }
}

impl Default for FilterPolicy {
    fn default() -> Self {
        Self::CODIC
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Majority {
    Zero,
    One,
}

/// Calibration of the synthetic cell population.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PufCalibration {
    /// Imbalance the SIG read has to overcome, in volts.
    pub threshold_v: f64,
    pub majority: Majority,
    /// Per-cell offset drift per degree of temperature change, in offset sigmas.
    pub temp_drift_per_c: f64,
    pub drift_clip_sigma: f64,
    /// Cells within this many offset sigmas below the threshold are tracked.
    pub candidate_margin_sigma: f64,
    pub variation: VariationModel,
}

impl Default for PufCalibration {
    fn default() -> Self {
        Self {
            threshold_v: 0.0742,
            majority: Majority::Zero,
            temp_drift_per_c: 1.5e-4,
            drift_clip_sigma: 4.0,
            candidate_margin_sigma: 0.25,
            variation: VariationModel::default(),
        }
    }
}

impl PufCalibration {
    pub fn validate(&self) -> Result<(), PufError> {
        self.variation.validate()?;
        let checks = [
            ("threshold_v", self.threshold_v, false),
            ("temp_drift_per_c", self.temp_drift_per_c, true),
            ("drift_clip_sigma", self.drift_clip_sigma, false),
            ("candidate_margin_sigma", self.candidate_margin_sigma, true),
        ];
        for (name, v, zero_ok) in checks {
            if !v.is_finite() || v < 0.0 || (!zero_ok && v == 0.0) {
                return Err(PufError::Calibration(name));
            }
        }
        Ok(())
    }
}
