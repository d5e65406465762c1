use serde::{Deserialize, Serialize};

use super::SchedulerError;
use crate::signals::VariantName;

/// Latency of each CODIC variant in nanoseconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CodicLatency {
    pub activate: f64,
    pub precharge: f64,
    pub sig: f64,
    pub sig_opt: f64,
    pub det_zero: f64,
    pub det_one: f64,
    pub esa: f64,
}

impl Default for CodicLatency {
    fn default() -> Self {
        Self { activate: 35.0, precharge: 13.0, sig: 35.0, sig_opt: 13.0, det_zero: 35.0, det_one: 35.0, esa: 35.0 }
    }
}

impl CodicLatency {
    pub fn get(&self, v: VariantName) -> f64 {
        match v {
            VariantName::Activate => self.activate,
            VariantName::Precharge => self.precharge,
            VariantName::Sig => self.sig,
            VariantName::SigOpt => self.sig_opt,
            VariantName::DetZero => self.det_zero,
            VariantName::DetOne => self.det_one,
            VariantName::Esa => self.esa,
        }
    }
}

/// DDR3 timing in clock cycles, except `tck_ns` and the CODIC latencies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimingParams {
    pub tck_ns: f64,
    pub cl: u64,
    pub cwl: u64,
    pub trcd: u64,
    pub trp: u64,
    pub tras: u64,
    pub trc: u64,
    pub trrd: u64,
    pub tfaw: u64,
    pub twr: u64,
    pub trtp: u64,
    pub burst_len: u64,
    /// One row-buffer movement hop of LISA-clone.
    pub lisa_hop: u64,
    pub codic_ns: CodicLatency,
}

impl Default for TimingParams {
    fn default() -> Self {
        Self::ddr3_1600()
    }
}

impl TimingParams {
    /// DDR3-1600 11-11-11.
    pub fn ddr3_1600() -> Self {
        Self {
            tck_ns: 1.25,
            cl: 11,
            cwl: 8,
            trcd: 11,
            trp: 11,
            tras: 28,
            trc: 39,
            trrd: 5,
            tfaw: 24,
            twr: 12,
            trtp: 6,
            burst_len: 8,
            lisa_hop: 49,
            codic_ns: CodicLatency::default(),
        }
    }

    pub fn validate(&self) -> Result<(), SchedulerError> {
        let err = |m: &str| Err(SchedulerError::Timing(m.to_string()));
        if !(self.tck_ns.is_finite() && self.tck_ns > 0.0) {
            return err("tck_ns must be positive");
        }
        let cycles = [
            self.cl,
            self.cwl,
            self.trcd,
            self.trp,
            self.tras,
            self.trc,
            self.trrd,
            self.tfaw,
            self.twr,
            self.trtp,
            self.burst_len,
            self.lisa_hop,
        ];
        if cycles.contains(&0) {
            return err("all cycle counts must be positive");
        }
        if !self.burst_len.is_multiple_of(2) {
            return err("burst length must be even");
        }
        if self.trc < self.tras + self.trp {
            return err("trc must be at least tras + trp");
        }
        if self.tfaw < self.trrd {
            return err("tfaw must be at least trrd");
        }
        for v in VariantName::ALL {
            let l = self.codic_ns.get(v);
            if !(l.is_finite() && l > 0.0) {
                return err("CODIC latencies must be positive");
            }
        }
        Ok(())
    }

    pub fn burst_cycles(&self) -> u64 {
        self.burst_len / 2
    }

    /// Last write data to precharge.
    pub fn write_recovery(&self) -> u64 {
        self.cwl + self.burst_cycles() + self.twr
    }

    pub fn ns_to_cycles(&self, ns: f64) -> u64 {
        (ns / self.tck_ns - 1e-9).ceil().max(0.0) as u64
    }

    /// Bank occupancy of one CODIC command, including its implicit precharge.
    pub fn codic_rc(&self, v: VariantName) -> u64 {
        self.ns_to_cycles(self.codic_ns.get(v)) + self.trp
    }

    pub fn cycles_to_ns(&self, cycles: u64) -> f64 {
        cycles as f64 * self.tck_ns
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn det_row_cycle_matches_trc() {
        let t = TimingParams::ddr3_1600();
        assert!(t.validate().is_ok());
        assert_eq!(t.codic_rc(VariantName::DetZero), 39);
        assert_eq!(t.codic_rc(VariantName::SigOpt), 22);
        assert_eq!(t.write_recovery(), 24);
    }

    #[test]
    fn invariants_enforced() {
        let t = TimingParams { trc: 30, ..TimingParams::ddr3_1600() };
        assert!(t.validate().is_err());
        let t = TimingParams { tfaw: 4, ..TimingParams::ddr3_1600() };
        assert!(t.validate().is_err());
    }
}
