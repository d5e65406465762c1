use statrs::distribution::{ContinuousCDF, Normal};

use super::{Challenge, FilterPolicy, Majority, PufCalibration, PufError, PufResponse, ROW_BYTES};
use crate::rng;
use crate::variation::{PvSpec, RngSeed};

/// A cell close enough to the flip threshold to matter. The offset is signed
/// toward the minority value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub addr: u64,
    pub offset_v: f64,
}

/// Environmental differences between enrollment and a later evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ReadConditions {
    pub delta_temp_c: f64,
    /// Aging shift of every offset toward the minority value.
    pub aging_drift_v: f64,
}

/// Synthetic subarray. Only cells whose offset lies above
/// `threshold - margin` are materialized; every other cell reads the
/// majority value under any admissible drift and any clipped noise.
#[derive(Debug, Clone)]
pub struct SubarrayModel {
    seed: u64,
    n_cells: u64,
    spec: PvSpec,
    calib: PufCalibration,
    offset_sigma_v: f64,
    noise_sigma_v: f64,
    /// Largest offset any untracked cell can have.
    untracked_max_v: f64,
    candidates: Vec<Candidate>,
}

const CELLS_PER_ROW: u64 = ROW_BYTES * 8;

pub fn build_subarray(
    seed: RngSeed,
    n_cells: u64,
    spec: PvSpec,
    calib: &PufCalibration,
) -> Result<SubarrayModel, PufError> {
    calib.validate()?;
    let spec = PvSpec::new(spec.pv_percent, spec.temperature_c)?;
    if n_cells < CELLS_PER_ROW || !n_cells.is_multiple_of(CELLS_PER_ROW) {
        return Err(PufError::CellCount { n_cells, row_bytes: ROW_BYTES });
    }
    let sigma = calib.variation.offset_sigma(&spec);
    let noise = calib.variation.read_noise_sigma(spec.temperature_c);
    let margin = calib.candidate_margin_sigma * sigma;
    let floor = calib.threshold_v - margin;
    let mut candidates = Vec::new();
    if sigma > 0.0 {
        let normal = Normal::standard();
        // Probability that one cell lies above the floor.
        let q = normal.cdf(-floor / sigma);
        if q > 0.0 {
            let log_miss = (-q).ln_1p();
            for row in 0..n_cells / CELLS_PER_ROW {
                let mut r = rng::keyed_rng(seed.0, &[0x5AB, row]);
                let base = row * CELLS_PER_ROW;
                let mut pos: u64 = 0;
                loop {
                    // Geometric gap to the next cell above the floor.
                    let gap = if q >= 1.0 { 0.0 } else { (rng::open01(&mut r).ln() / log_miss).floor() };
                    if gap >= (CELLS_PER_ROW - pos) as f64 {
                        break;
                    }
                    pos += gap as u64;
                    // Offset conditioned on exceeding the floor.
                    let u = rng::open01(&mut r) * q;
                    let offset_v = -sigma * normal.inverse_cdf(u);
                    candidates.push(Candidate { addr: base + pos, offset_v: offset_v.max(floor) });
                    pos += 1;
                    if pos >= CELLS_PER_ROW {
                        break;
                    }
                }
            }
        }
    }
    Ok(SubarrayModel {
        seed: seed.0,
        n_cells,
        spec,
        calib: *calib,
        offset_sigma_v: sigma,
        noise_sigma_v: noise,
        untracked_max_v: if sigma > 0.0 { floor } else { 0.0 },
        candidates,
    })
}

impl SubarrayModel {
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn n_cells(&self) -> u64 {
        self.n_cells
    }

    pub fn spec(&self) -> PvSpec {
        self.spec
    }

    pub fn calibration(&self) -> &PufCalibration {
        &self.calib
    }

    pub fn offset_sigma_v(&self) -> f64 {
        self.offset_sigma_v
    }

    pub fn noise_sigma_v(&self) -> f64 {
        self.noise_sigma_v
    }

    pub fn candidates(&self) -> &[Candidate] {
        &self.candidates
    }

    pub fn segments(&self, segment_size: u64) -> u64 {
        self.n_cells / (segment_size * 8)
    }

    /// Cells that read the minority value in the absence of noise and drift.
    pub fn flipped_cells(&self) -> impl Iterator<Item = u64> + '_ {
        let b = self.calib.threshold_v;
        self.candidates.iter().filter(move |c| c.offset_v > b).map(|c| c.addr)
    }

    pub fn flipped_fraction(&self) -> f64 {
        self.flipped_cells().count() as f64 / self.n_cells as f64
    }

    /// Overrides the per-read noise sigma.
    pub fn with_noise_sigma(mut self, noise_sigma_v: f64) -> Self {
        self.noise_sigma_v = noise_sigma_v.max(0.0);
        self
    }

    /// Sense-amplifier imbalance to program into the circuit model so that
    /// its SIG read agrees with [`respond`].
    pub fn circuit_imbalance_v(&self) -> f64 {
        match self.calib.majority {
            Majority::Zero => -self.calib.threshold_v,
            Majority::One => self.calib.threshold_v,
        }
    }

    /// Physical offset of a candidate, for use with the circuit model.
    pub fn physical_offset_v(&self, c: &Candidate) -> f64 {
        match self.calib.majority {
            Majority::Zero => c.offset_v,
            Majority::One => -c.offset_v,
        }
    }

    pub fn check(&self, ch: &Challenge) -> Result<(), PufError> {
        let cells = ch.cells();
        let ok = ch.segment_size > 0
            && ch.segment_size.is_multiple_of(ROW_BYTES)
            && ch.segment_base.is_multiple_of(CELLS_PER_ROW)
            && ch.segment_base.checked_add(cells).is_some_and(|end| end <= self.n_cells);
        if ok {
            Ok(())
        } else {
            Err(PufError::Challenge { base: ch.segment_base, size: ch.segment_size, n_cells: self.n_cells })
        }
    }

    fn segment_candidates(&self, ch: &Challenge) -> &[Candidate] {
        let lo = self.candidates.partition_point(|c| c.addr < ch.segment_base);
        let hi = self.candidates.partition_point(|c| c.addr < ch.segment_base + ch.cells());
        &self.candidates[lo..hi]
    }

    /// Static drift of one cell under `cond`, toward the minority value.
    fn drift(&self, addr: u64, cond: &ReadConditions) -> f64 {
        let mut d = cond.aging_drift_v;
        if cond.delta_temp_c != 0.0 {
            let mut r = rng::keyed_rng(self.seed, &[0xD21F, addr]);
            let z = rng::truncated_normal(&mut r, self.calib.drift_clip_sigma);
            d += self.calib.temp_drift_per_c * cond.delta_temp_c * self.offset_sigma_v * z;
        }
        d
    }

    fn max_drift(&self, cond: &ReadConditions) -> f64 {
        cond.aging_drift_v.abs()
            + self.calib.temp_drift_per_c * cond.delta_temp_c.abs() * self.offset_sigma_v * self.calib.drift_clip_sigma
    }
}

pub fn respond(
    sub: &SubarrayModel,
    challenge: &Challenge,
    policy: &FilterPolicy,
    read_seed: RngSeed,
) -> Result<PufResponse, PufError> {
    respond_with(sub, challenge, policy, read_seed, &ReadConditions::default())
}

/// Evaluates `challenge` `policy.n_reads` times and keeps the cells that
/// read the minority value at least `policy.threshold` times.
pub fn respond_with(
    sub: &SubarrayModel,
    challenge: &Challenge,
    policy: &FilterPolicy,
    read_seed: RngSeed,
    cond: &ReadConditions,
) -> Result<PufResponse, PufError> {
    sub.check(challenge)?;
    policy.validate()?;
    let b = sub.calib.threshold_v;
    let temp = sub.spec.temperature_c + cond.delta_temp_c;
    let nominal = sub.calib.variation.read_noise_sigma(sub.spec.temperature_c);
    let noise = if nominal > 0.0 {
        sub.noise_sigma_v * sub.calib.variation.read_noise_sigma(temp) / nominal
    } else {
        sub.noise_sigma_v
    };
    let clip = sub.calib.variation.noise_clip_sigma;
    let drift_bound = sub.max_drift(cond);
    let margin_v = b - sub.untracked_max_v - clip * noise;
    // A NaN bound is rejected too.
    if drift_bound.partial_cmp(&margin_v).is_none_or(|o| o.is_gt()) {
        return Err(PufError::Drift { drift_v: drift_bound, margin_v });
    }
    let mut addrs = Vec::new();
    for c in sub.segment_candidates(challenge) {
        let excess = c.offset_v + sub.drift(c.addr, cond) - b;
        let hits = if excess > clip * noise {
            policy.n_reads
        } else if excess <= -clip * noise {
            0
        } else {
            (0..policy.n_reads)
                .filter(|&r| {
                    let mut g = rng::keyed_rng(read_seed.0, &[r as u64, c.addr]);
                    excess + noise * rng::truncated_normal(&mut g, clip) > 0.0
                })
                .count() as u32
        };
        if hits >= policy.threshold {
            addrs.push(c.addr - challenge.segment_base);
        }
    }
    Ok(PufResponse::from_sorted(addrs))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> PvSpec {
        PvSpec::new(4.0, 30.0).unwrap()
    }

    #[test]
    fn rejects_partial_rows() {
        let c = PufCalibration::default();
        assert!(build_subarray(RngSeed(1), 1000, spec(), &c).is_err());
        assert!(build_subarray(RngSeed(1), CELLS_PER_ROW, spec(), &c).is_ok());
    }

    #[test]
    fn candidates_sorted_and_above_floor() {
        let c = PufCalibration::default();
        let s = build_subarray(RngSeed(9), 16 * CELLS_PER_ROW, spec(), &c).unwrap();
        let floor = c.threshold_v - c.candidate_margin_sigma * s.offset_sigma_v();
        assert!(s.candidates().windows(2).all(|w| w[0].addr < w[1].addr));
        assert!(s.candidates().iter().all(|x| x.offset_v >= floor && x.addr < s.n_cells()));
    }

    #[test]
    fn challenge_bounds() {
        let s = build_subarray(RngSeed(1), 2 * CELLS_PER_ROW, spec(), &PufCalibration::default()).unwrap();
        let p = FilterPolicy::UNFILTERED;
        assert!(respond(&s, &Challenge::segment(1, 8192), &p, RngSeed(0)).is_ok());
        assert!(respond(&s, &Challenge::segment(2, 8192), &p, RngSeed(0)).is_err());
        let unaligned = Challenge { segment_base: 8, segment_size: 8192 };
        assert!(respond(&s, &unaligned, &p, RngSeed(0)).is_err());
    }

    #[test]
    fn excessive_drift_is_an_error() {
        let s = build_subarray(RngSeed(1), CELLS_PER_ROW, spec(), &PufCalibration::default()).unwrap();
        let cond = ReadConditions { delta_temp_c: 0.0, aging_drift_v: 1.0 };
        let r = respond_with(&s, &Challenge::segment(0, 8192), &FilterPolicy::CODIC, RngSeed(0), &cond);
        assert!(matches!(r, Err(PufError::Drift { .. })));
    }
}
