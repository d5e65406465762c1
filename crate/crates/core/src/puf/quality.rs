use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{
    authenticate, jaccard, respond, respond_with, AuthDecision, Challenge, FilterPolicy, PufError, ReadConditions,
    SubarrayModel,
};
use crate::rng;
use crate::variation::RngSeed;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct JaccardDistributions {
    pub intra: Vec<f64>,
    pub inter: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub bin_low: f64,
    pub bin_high: f64,
    pub intra_count: u64,
    pub inter_count: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FarFrr {
    pub far: f64,
    pub frr: f64,
    pub genuine_pairs: usize,
    pub impostor_pairs: usize,
    pub false_accepts: usize,
    pub false_rejects: usize,
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

fn segment_count(sub: &SubarrayModel, segment_size: u64) -> Result<u64, PufError> {
    let have = if segment_size == 0 { 0 } else { sub.segments(segment_size) };
    if have < 2 {
        return Err(PufError::TooFewSegments { need: 2, have });
    }
    Ok(have)
}

fn two_segments(r: &mut impl Rng, n: u64) -> (u64, u64) {
    let a = r.random_range(0..n);
    let mut b = r.random_range(0..n - 1);
    if b >= a {
        b += 1;
    }
    (a, b)
}

/// Intra pairs evaluate one segment twice with different read seeds; inter
/// pairs evaluate two distinct segments.
pub fn intra_inter_distributions(
    sub: &SubarrayModel,
    n_pairs: usize,
    segment_size: u64,
    policy: &FilterPolicy,
    seed: RngSeed,
) -> Result<JaccardDistributions, PufError> {
    let n = segment_count(sub, segment_size)?;
    let mut r = rng::keyed_rng(seed.0, &[0x1A7A]);
    let mut out = JaccardDistributions { intra: Vec::with_capacity(n_pairs), inter: Vec::with_capacity(n_pairs) };
    for _ in 0..n_pairs {
        let s = Challenge::segment(r.random_range(0..n), segment_size);
        let a = respond(sub, &s, policy, RngSeed(r.random()))?;
        let b = respond(sub, &s, policy, RngSeed(r.random()))?;
        out.intra.push(jaccard(&a, &b));

        let (i, j) = two_segments(&mut r, n);
        let a = respond(sub, &Challenge::segment(i, segment_size), policy, RngSeed(r.random()))?;
        let b = respond(sub, &Challenge::segment(j, segment_size), policy, RngSeed(r.random()))?;
        out.inter.push(jaccard(&a, &b));
    }
    Ok(out)
}

/// Exact-match authentication without filtering: genuine pairs re-read the
/// enrolled segment, impostor pairs present a different segment.
pub fn far_frr_experiment(
    sub: &SubarrayModel,
    n_pairs: usize,
    segment_size: u64,
    seed: RngSeed,
) -> Result<FarFrr, PufError> {
    let n = segment_count(sub, segment_size)?;
    let policy = FilterPolicy::UNFILTERED;
    let mut r = rng::keyed_rng(seed.0, &[0xFA2]);
    let (mut false_rejects, mut false_accepts) = (0, 0);
    for _ in 0..n_pairs {
        let s = Challenge::segment(r.random_range(0..n), segment_size);
        let enrolled = respond(sub, &s, &policy, RngSeed(r.random()))?;
        let probe = respond(sub, &s, &policy, RngSeed(r.random()))?;
        if authenticate(&enrolled, &probe) == AuthDecision::Reject {
            false_rejects += 1;
        }

        let (i, j) = two_segments(&mut r, n);
        let enrolled = respond(sub, &Challenge::segment(i, segment_size), &policy, RngSeed(r.random()))?;
        let probe = respond(sub, &Challenge::segment(j, segment_size), &policy, RngSeed(r.random()))?;
        if authenticate(&enrolled, &probe) == AuthDecision::Accept {
            false_accepts += 1;
        }
    }
    let rate = |k: usize| if n_pairs == 0 { 0.0 } else { k as f64 / n_pairs as f64 };
    Ok(FarFrr {
        far: rate(false_accepts),
        frr: rate(false_rejects),
        genuine_pairs: n_pairs,
        impostor_pairs: n_pairs,
        false_accepts,
        false_rejects,
    })
}

/// Intra-Jaccard between an enrollment at the build temperature and a probe
/// taken `delta_temp_c` degrees away.
pub fn temperature_intra(
    sub: &SubarrayModel,
    n_pairs: usize,
    segment_size: u64,
    delta_temp_c: f64,
    policy: &FilterPolicy,
    seed: RngSeed,
) -> Result<Vec<f64>, PufError> {
    let n = segment_count(sub, segment_size)?;
    let mut r = rng::keyed_rng(seed.0, &[0x7E3]);
    let cond = ReadConditions { delta_temp_c, aging_drift_v: 0.0 };
    (0..n_pairs)
        .map(|_| {
            let s = Challenge::segment(r.random_range(0..n), segment_size);
            let a = respond(sub, &s, policy, RngSeed(r.random()))?;
            let b = respond_with(sub, &s, policy, RngSeed(r.random()), &cond)?;
            Ok(jaccard(&a, &b))
        })
        .collect()
}

/// Equal-width bins over [0, 1]; the last bin is closed.
pub fn histogram(d: &JaccardDistributions, bins: usize) -> Vec<HistogramBin> {
    let bins = bins.max(1);
    let mut out: Vec<HistogramBin> = (0..bins)
        .map(|i| HistogramBin {
            bin_low: i as f64 / bins as f64,
            bin_high: (i + 1) as f64 / bins as f64,
            intra_count: 0,
            inter_count: 0,
        })
        .collect();
    let index = |x: f64| ((x.clamp(0.0, 1.0) * bins as f64) as usize).min(bins - 1);
    for &x in &d.intra {
        out[index(x)].intra_count += 1;
    }
    for &x in &d.inter {
        out[index(x)].inter_count += 1;
    }
    out
}

pub fn histogram_csv(bins: &[HistogramBin]) -> String {
    let mut out = String::from("bin_low,bin_high,intra_count,inter_count\n");
    for b in bins {
        let _ = writeln!(out, "{},{},{},{}", b.bin_low, b.bin_high, b.intra_count, b.inter_count);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn histogram_closes_last_bin() {
        let d = JaccardDistributions { intra: vec![1.0, 0.95], inter: vec![0.0, 0.01] };
        let h = histogram(&d, 20);
        assert_eq!(h[19].intra_count, 2);
        assert_eq!(h[0].inter_count, 2);
    }
}
