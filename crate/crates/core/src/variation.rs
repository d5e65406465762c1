//! Process and temperature variation: sense-amplifier offsets, read noise,
//! leakage, and the enforced-sense-amplification flip-rate experiment.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{self, CellState, CircuitError, CircuitParams, ReadValue};
use crate::rng;
use crate::signals::VariantName;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VariationError {
    #[error("process variation {0}% outside [0, 100]")]
    Pv(f64),
    #[error("temperature {0} C outside [-40, 125]")]
    Temperature(f64),
    #[error("model parameter `{0}` is out of range")]
    Param(&'static str),
    #[error("need at least {min} samples, got {got}")]
    TooFewSamples { min: usize, got: usize },
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PvSpec {
    pub pv_percent: f64,
    pub temperature_c: f64,
}

impl PvSpec {
    pub fn new(pv_percent: f64, temperature_c: f64) -> Result<Self, VariationError> {
        if !(0.0..=100.0).contains(&pv_percent) {
            return Err(VariationError::Pv(pv_percent));
        }
        if !(-40.0..=125.0).contains(&temperature_c) {
            return Err(VariationError::Temperature(temperature_c));
        }
        Ok(Self { pv_percent, temperature_c })
    }
}

/// Random quantities attached to one cell/sense-amplifier pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariationSample {
    pub sa_offset_v: f64,
    pub read_noise_sigma_v: f64,
    /// Noise realized for one particular read.
    pub read_noise_v: f64,
    /// Cell leakage toward vdd/2, in 1/s.
    pub leak_rate: f64,
}

impl VariationSample {
    pub fn nominal() -> Self {
        Self { sa_offset_v: 0.0, read_noise_sigma_v: 0.0, read_noise_v: 0.0, leak_rate: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngSeed(pub u64);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VariationModel {
    pub vdd: f64,
    /// Offset sigma per unit of relative process variation, as a fraction of vdd.
    pub k_offset: f64,
    /// Read-noise sigma at the reference temperature.
    pub k_noise_v: f64,
    pub reference_temp_c: f64,
    /// Temperature rise over which read noise grows by one reference sigma.
    pub noise_temp_span_c: f64,
    pub noise_clip_sigma: f64,
    pub leak_rate_ref: f64,
    pub leak_doubling_c: f64,
    /// Aging: uniform shift of every offset.
    pub offset_drift_v: f64,
}

impl Default for VariationModel {
    fn default() -> Self {
        Self {
            vdd: 1.5,
            k_offset: 0.4,
            k_noise_v: 6.168e-7,
            reference_temp_c: 30.0,
            noise_temp_span_c: 55.0,
            noise_clip_sigma: 8.0,
            leak_rate_ref: 1.0,
            leak_doubling_c: 10.0,
            offset_drift_v: 0.0,
        }
    }
}

impl VariationModel {
    pub fn validate(&self) -> Result<(), VariationError> {
        let positive = [
            ("vdd", self.vdd),
            ("noise_temp_span_c", self.noise_temp_span_c),
            ("noise_clip_sigma", self.noise_clip_sigma),
            ("leak_doubling_c", self.leak_doubling_c),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(VariationError::Param(name));
            }
        }
        let non_negative = [("k_offset", self.k_offset), ("k_noise_v", self.k_noise_v), ("leak_rate_ref", self.leak_rate_ref)];
        for (name, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return Err(VariationError::Param(name));
            }
        }
        if !self.offset_drift_v.is_finite() {
            return Err(VariationError::Param("offset_drift_v"));
        }
        Ok(())
    }

    pub fn offset_sigma(&self, spec: &PvSpec) -> f64 {
        self.k_offset * spec.pv_percent / 100.0 * self.vdd
    }

    pub fn read_noise_sigma(&self, temperature_c: f64) -> f64 {
        let f = 1.0 + (temperature_c - self.reference_temp_c) / self.noise_temp_span_c;
        self.k_noise_v * f.max(0.0)
    }

    pub fn leak_rate(&self, temperature_c: f64) -> f64 {
        self.leak_rate_ref * 2f64.powf((temperature_c - self.reference_temp_c) / self.leak_doubling_c)
    }

    /// `n` independent samples. Offsets are `sigma * z_i` where the `z_i`
    /// depend only on the seed, so sweeps over PV reuse the same draws.
    pub fn sample(&self, spec: &PvSpec, seed: RngSeed, n: usize) -> Vec<VariationSample> {
        let mut r = rng::keyed_rng(seed.0, &[0x0FF5]);
        let sigma = self.offset_sigma(spec);
        let noise = self.read_noise_sigma(spec.temperature_c);
        let leak = self.leak_rate(spec.temperature_c);
        (0..n)
            .map(|_| {
                let z: f64 = rand::Rng::sample(&mut r, rand_distr::StandardNormal);
                VariationSample {
                    sa_offset_v: sigma * z + self.offset_drift_v,
                    read_noise_sigma_v: noise,
                    read_noise_v: 0.0,
                    leak_rate: leak,
                }
            })
            .collect()
    }

    /// Draws one read's noise for every sample.
    pub fn realize_read_noise(&self, samples: &mut [VariationSample], seed: RngSeed) {
        let mut r = rng::keyed_rng(seed.0, &[0x401E]);
        for s in samples {
            s.read_noise_v = s.read_noise_sigma_v * rng::truncated_normal(&mut r, self.noise_clip_sigma);
        }
    }
}

/// Built-in imbalance that the enforced-sense-amplification schedule sees,
/// and its weakening with temperature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EsaCalibration {
    pub imbalance_v: f64,
    pub reference_temp_c: f64,
    pub imbalance_temp_coeff: f64,
}

impl Default for EsaCalibration {
    fn default() -> Self {
        Self { imbalance_v: 0.0888, reference_temp_c: 30.0, imbalance_temp_coeff: 0.0026 }
    }
}

impl EsaCalibration {
    pub fn imbalance_at(&self, temperature_c: f64) -> f64 {
        (self.imbalance_v * (1.0 - self.imbalance_temp_coeff * (temperature_c - self.reference_temp_c))).max(0.0)
    }
}

pub const ESA_MIN_SAMPLES: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlipRateResult {
    pub pv_percent: f64,
    pub temperature_c: f64,
    pub n: usize,
    pub flips: usize,
    pub metastable: usize,
    pub flip_rate: f64,
    /// Sample indices that read the minority value.
    pub flip_indices: Vec<usize>,
}

/// Fraction of cells whose enforced-sense-amplification read disagrees with
/// the imbalance-determined majority value (1).
pub fn esa_flip_rate(spec: PvSpec, n: usize, seed: RngSeed) -> Result<FlipRateResult, VariationError> {
    esa_flip_rate_with(&VariationModel::default(), &EsaCalibration::default(), &CircuitParams::default(), spec, n, seed)
}

pub fn esa_flip_rate_with(
    model: &VariationModel,
    esa: &EsaCalibration,
    params: &CircuitParams,
    spec: PvSpec,
    n: usize,
    seed: RngSeed,
) -> Result<FlipRateResult, VariationError> {
    if n < ESA_MIN_SAMPLES {
        return Err(VariationError::TooFewSamples { min: ESA_MIN_SAMPLES, got: n });
    }
    model.validate()?;
    let spec = PvSpec::new(spec.pv_percent, spec.temperature_c)?;
    let mut samples = model.sample(&spec, seed, n);
    model.realize_read_noise(&mut samples, seed);
    let p = CircuitParams { sa_imbalance_v: esa.imbalance_at(spec.temperature_c), ..*params };
    let schedule = VariantName::Esa.schedule();
    let initial = CellState::precharged(p.half(), &p);
    let mut flip_indices = Vec::new();
    let mut metastable = 0;
    for (i, s) in samples.iter().enumerate() {
        let end = circuit::run_final(&schedule, initial, &p, s)?;
        match circuit::read_value(&end, &p) {
            ReadValue::Zero => flip_indices.push(i),
            ReadValue::Metastable => metastable += 1,
            ReadValue::One => {}
        }
    }
    Ok(FlipRateResult {
        pv_percent: spec.pv_percent,
        temperature_c: spec.temperature_c,
        n,
        flips: flip_indices.len(),
        metastable,
        flip_rate: flip_indices.len() as f64 / n as f64,
        flip_indices,
    })
}

pub fn flip_rates_csv(rows: &[FlipRateResult]) -> String {
    let mut out = String::from("pv_percent,temperature_c,n,flip_rate\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{}", r.pv_percent, r.temperature_c, r.n, r.flip_rate);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_bounds() {
        assert!(PvSpec::new(4.0, 30.0).is_ok());
        assert!(PvSpec::new(-1.0, 30.0).is_err());
        assert!(PvSpec::new(4.0, 200.0).is_err());
    }

    #[test]
    fn zero_pv_has_no_offsets() {
        let m = VariationModel::default();
        let s = m.sample(&PvSpec::new(0.0, 30.0).unwrap(), RngSeed(1), 100);
        assert!(s.iter().all(|x| x.sa_offset_v == 0.0));
    }

    #[test]
    fn esa_needs_enough_samples() {
        let r = esa_flip_rate(PvSpec::new(4.0, 30.0).unwrap(), 10, RngSeed(1));
        assert!(matches!(r, Err(VariationError::TooFewSamples { .. })));
    }

    #[test]
    fn noise_grows_with_temperature() {
        let m = VariationModel::default();
        assert!((m.read_noise_sigma(85.0) / m.read_noise_sigma(30.0) - 2.0).abs() < 1e-12);
    }
}
