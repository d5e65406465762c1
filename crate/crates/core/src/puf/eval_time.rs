use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{FilterPolicy, PufError, SEGMENT_BYTES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PufMechanism {
    CodicSig,
    PreLat,
    LatencyPuf,
}

impl PufMechanism {
    pub const ALL: [PufMechanism; 3] = [PufMechanism::CodicSig, PufMechanism::PreLat, PufMechanism::LatencyPuf];

    pub fn name(self) -> &'static str {
        match self {
            PufMechanism::CodicSig => "codic_sig",
            PufMechanism::PreLat => "prelat",
            PufMechanism::LatencyPuf => "latency_puf",
        }
    }
}

impl fmt::Display for PufMechanism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PufMechanism {
    type Err = PufError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "codic" | "codic_sig" => Ok(PufMechanism::CodicSig),
            "prelat" | "prelatpuf" | "prelat_puf" => Ok(PufMechanism::PreLat),
            "latency" | "latency_puf" | "latencypuf" => Ok(PufMechanism::LatencyPuf),
            _ => Err(PufError::UnknownMechanism(s.to_string())),
        }
    }
}

/// Cost of one evaluation of an 8KB segment, in milliseconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalTimeModel {
    pub codic_sig_ms: f64,
    pub prelat_ms: f64,
    pub latency_puf_ms: f64,
}

impl Default for EvalTimeModel {
    fn default() -> Self {
        Self { codic_sig_ms: 0.882, prelat_ms: 1.59, latency_puf_ms: 0.882 }
    }
}

impl EvalTimeModel {
    pub fn per_read_ms(&self, m: PufMechanism) -> f64 {
        match m {
            PufMechanism::CodicSig => self.codic_sig_ms,
            PufMechanism::PreLat => self.prelat_ms,
            PufMechanism::LatencyPuf => self.latency_puf_ms,
        }
    }

    pub fn eval_time(&self, m: PufMechanism, policy: &FilterPolicy, segment_size: u64) -> f64 {
        policy.n_reads as f64 * self.per_read_ms(m) * segment_size as f64 / SEGMENT_BYTES as f64
    }
}

/// Milliseconds to evaluate one challenge with the default cost model.
pub fn eval_time(m: PufMechanism, policy: &FilterPolicy, segment_size: u64) -> f64 {
    EvalTimeModel::default().eval_time(m, policy, segment_size)
}
