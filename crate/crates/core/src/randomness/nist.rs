//! Seven SP 800-22 tests. Each function takes the whole stream and returns
//! the test statistic with its p-value(s); [`run_suite`] applies the
//! recommended minimum lengths and verdicts.

use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;
use statrs::function::gamma::gamma_ur;

use super::{BitStream, RandomnessError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NistResult {
    pub statistic: f64,
    pub p_values: Vec<f64>,
}

impl NistResult {
    fn single(statistic: f64, p: f64) -> Self {
        Self { statistic, p_values: vec![p] }
    }

    /// Smallest p-value, the one that decides the verdict.
    pub fn p_value(&self) -> f64 {
        self.p_values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

fn igamc(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else {
        gamma_ur(a, x)
    }
}

fn phi(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

fn need(test: &'static str, min: usize, s: &BitStream) -> Result<(), RandomnessError> {
    if s.len() < min {
        Err(RandomnessError::TooShort { test, min, got: s.len() })
    } else {
        Ok(())
    }
}

pub fn monobit(s: &BitStream) -> Result<NistResult, RandomnessError> {
    need("monobit", 1, s)?;
    let n = s.len() as f64;
    let sum = 2.0 * s.ones() as f64 - n;
    let s_obs = sum.abs() / n.sqrt();
    Ok(NistResult::single(s_obs, erfc(s_obs / std::f64::consts::SQRT_2)))
}

pub fn block_frequency(s: &BitStream, m: usize) -> Result<NistResult, RandomnessError> {
    if m == 0 {
        return Err(RandomnessError::Param { test: "frequency_within_block", name: "M", value: m });
    }
    need("frequency_within_block", m, s)?;
    let blocks = s.len() / m;
    let chi2: f64 = s.bits()[..blocks * m]
        .chunks_exact(m)
        .map(|b| {
            let pi = b.iter().map(|&x| x as f64).sum::<f64>() / m as f64;
            (pi - 0.5).powi(2)
        })
        .sum::<f64>()
        * 4.0
        * m as f64;
    Ok(NistResult::single(chi2, igamc(blocks as f64 / 2.0, chi2 / 2.0)))
}

pub fn runs(s: &BitStream) -> Result<NistResult, RandomnessError> {
    need("runs", 2, s)?;
    let n = s.len() as f64;
    let pi = s.ones() as f64 / n;
    if (pi - 0.5).abs() >= 2.0 / n.sqrt() {
        // Frequency prerequisite failed.
        return Ok(NistResult::single(f64::NAN, 0.0));
    }
    let v = 1 + s.bits().windows(2).filter(|w| w[0] != w[1]).count();
    let num = (v as f64 - 2.0 * n * pi * (1.0 - pi)).abs();
    let den = 2.0 * (2.0 * n).sqrt() * pi * (1.0 - pi);
    Ok(NistResult::single(v as f64, erfc(num / den)))
}

struct LongestRunTable {
    m: usize,
    /// Run length mapped to the first and last category.
    low: usize,
    high: usize,
    pi: &'static [f64],
}

const LONGEST_RUN_8: LongestRunTable =
    LongestRunTable { m: 8, low: 1, high: 4, pi: &[0.21484375, 0.3671875, 0.23046875, 0.1875] };
const LONGEST_RUN_128: LongestRunTable = LongestRunTable {
    m: 128,
    low: 4,
    high: 9,
    pi: &[0.1174035788, 0.242955959, 0.249363483, 0.17517706, 0.102701071, 0.112398847],
};
const LONGEST_RUN_10K: LongestRunTable = LongestRunTable {
    m: 10_000,
    low: 10,
    high: 16,
    pi: &[0.0882, 0.2092, 0.2483, 0.1933, 0.1208, 0.0675, 0.0727],
};

pub const LONGEST_RUN_MIN: usize = 128;

pub fn longest_run(s: &BitStream) -> Result<NistResult, RandomnessError> {
    need("longest_run_ones_in_a_block", LONGEST_RUN_MIN, s)?;
    let t = match s.len() {
        n if n < 6272 => &LONGEST_RUN_8,
        n if n < 750_000 => &LONGEST_RUN_128,
        _ => &LONGEST_RUN_10K,
    };
    let blocks = s.len() / t.m;
    let mut nu = vec![0usize; t.pi.len()];
    for b in s.bits()[..blocks * t.m].chunks_exact(t.m) {
        let (mut run, mut best) = (0usize, 0usize);
        for &x in b {
            run = if x == 1 { run + 1 } else { 0 };
            best = best.max(run);
        }
        nu[best.clamp(t.low, t.high) - t.low] += 1;
    }
    let nf = blocks as f64;
    let chi2: f64 = nu.iter().zip(t.pi).map(|(&v, &p)| (v as f64 - nf * p).powi(2) / (nf * p)).sum();
    let k = (t.pi.len() - 1) as f64;
    Ok(NistResult::single(chi2, igamc(k / 2.0, chi2 / 2.0)))
}

/// Frequencies of every overlapping `m`-bit pattern, wrapping around the end.
fn pattern_counts(bits: &[u8], m: usize) -> Vec<u64> {
    let mut counts = vec![0u64; 1 << m];
    if m == 0 {
        counts[0] = bits.len() as u64;
        return counts;
    }
    let n = bits.len();
    let mask = (1usize << m) - 1;
    let mut w = 0usize;
    for &b in &bits[..m - 1] {
        w = (w << 1) | b as usize;
    }
    for i in 0..n {
        w = ((w << 1) | bits[(i + m - 1) % n] as usize) & mask;
        counts[w] += 1;
    }
    counts
}

fn psi_sq(bits: &[u8], m: usize) -> f64 {
    if m == 0 {
        return 0.0;
    }
    let n = bits.len() as f64;
    let sum: f64 = pattern_counts(bits, m).iter().map(|&c| (c as f64).powi(2)).sum();
    sum * (1u64 << m) as f64 / n - n
}

/// Returns the two p-values for the first and second differences.
pub fn serial(s: &BitStream, m: usize) -> Result<NistResult, RandomnessError> {
    if !(2..=24).contains(&m) {
        return Err(RandomnessError::Param { test: "serial", name: "m", value: m });
    }
    need("serial", m, s)?;
    let p0 = psi_sq(s.bits(), m);
    let p1 = psi_sq(s.bits(), m - 1);
    let p2 = psi_sq(s.bits(), m - 2);
    let d1 = p0 - p1;
    let d2 = p0 - 2.0 * p1 + p2;
    Ok(NistResult {
        statistic: p0,
        p_values: vec![igamc(2f64.powi(m as i32 - 2), d1 / 2.0), igamc(2f64.powi(m as i32 - 3), d2 / 2.0)],
    })
}

pub fn approximate_entropy(s: &BitStream, m: usize) -> Result<NistResult, RandomnessError> {
    if !(1..=24).contains(&m) {
        return Err(RandomnessError::Param { test: "approximate_entropy", name: "m", value: m });
    }
    need("approximate_entropy", m + 1, s)?;
    let n = s.len() as f64;
    let phi_m = |k: usize| -> f64 {
        pattern_counts(s.bits(), k)
            .iter()
            .filter(|&&c| c > 0)
            .map(|&c| {
                let p = c as f64 / n;
                p * p.ln()
            })
            .sum()
    };
    let apen = phi_m(m) - phi_m(m + 1);
    let chi2 = 2.0 * n * (std::f64::consts::LN_2 - apen);
    Ok(NistResult::single(chi2, igamc(2f64.powi(m as i32 - 1), chi2 / 2.0)))
}

fn cusum_p(steps: impl Iterator<Item = u8>, n: usize) -> f64 {
    let mut s: i64 = 0;
    let mut z: i64 = 0;
    for b in steps {
        s += if b == 1 { 1 } else { -1 };
        z = z.max(s.abs());
    }
    let (n_i, nf) = (n as i64, n as f64);
    let zf = z as f64;
    let sq = nf.sqrt();
    let mut sum1 = 0.0;
    let mut k = (-n_i / z + 1) / 4;
    while k <= (n_i / z - 1) / 4 {
        let kf = k as f64;
        sum1 += phi((4.0 * kf + 1.0) * zf / sq) - phi((4.0 * kf - 1.0) * zf / sq);
        k += 1;
    }
    let mut sum2 = 0.0;
    let mut k = (-n_i / z - 3) / 4;
    while k <= (n_i / z - 1) / 4 {
        let kf = k as f64;
        sum2 += phi((4.0 * kf + 3.0) * zf / sq) - phi((4.0 * kf + 1.0) * zf / sq);
        k += 1;
    }
    (1.0 - sum1 + sum2).clamp(0.0, 1.0)
}

/// Forward and backward p-values, in that order.
pub fn cumulative_sums(s: &BitStream) -> Result<NistResult, RandomnessError> {
    need("cumulative_sums", 1, s)?;
    let n = s.len();
    let fwd = cusum_p(s.bits().iter().copied(), n);
    let bwd = cusum_p(s.bits().iter().rev().copied(), n);
    Ok(NistResult { statistic: f64::NAN, p_values: vec![fwd, bwd] })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
    Skipped,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Skipped => "SKIPPED",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub test: String,
    pub p_value: Option<f64>,
    pub p_values: Vec<f64>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteParams {
    pub alpha: f64,
    pub block_m: usize,
    pub serial_m: usize,
    pub apen_m: usize,
}

impl Default for SuiteParams {
    fn default() -> Self {
        Self { alpha: 0.01, block_m: 128, serial_m: 16, apen_m: 10 }
    }
}

fn floor_log2(n: usize) -> usize {
    if n == 0 {
        0
    } else {
        (usize::BITS - 1 - n.leading_zeros()) as usize
    }
}

pub fn run_suite(s: &BitStream) -> Vec<TestReport> {
    run_suite_with(s, &SuiteParams::default())
}

/// Runs all seven tests. A test whose recommended minimum length is not met
/// is reported as skipped.
pub fn run_suite_with(s: &BitStream, params: &SuiteParams) -> Vec<TestReport> {
    let n = s.len();
    let lg = floor_log2(n);
    type Test<'a> = Box<dyn Fn(&BitStream) -> Result<NistResult, RandomnessError> + 'a>;
    let tests: Vec<(&str, bool, Test)> = vec![
        ("monobit", n >= 100, Box::new(monobit)),
        (
            "frequency_within_block",
            n >= 100 && params.block_m >= 20 && n >= params.block_m,
            Box::new(|s| block_frequency(s, params.block_m)),
        ),
        ("runs", n >= 100, Box::new(runs)),
        ("longest_run_ones_in_a_block", n >= LONGEST_RUN_MIN, Box::new(longest_run)),
        ("serial", params.serial_m + 2 < lg, Box::new(|s| serial(s, params.serial_m))),
        ("approximate_entropy", params.apen_m + 5 < lg, Box::new(|s| approximate_entropy(s, params.apen_m))),
        ("cumulative_sums", n >= 100, Box::new(cumulative_sums)),
    ];
    tests
        .into_iter()
        .map(|(name, long_enough, f)| {
            let result = if long_enough { f(s).ok() } else { None };
            match result {
                Some(r) => {
                    let p = r.p_value();
                    TestReport {
                        test: name.to_string(),
                        p_value: Some(p),
                        p_values: r.p_values,
                        verdict: if p >= params.alpha { Verdict::Pass } else { Verdict::Fail },
                    }
                }
                None => TestReport { test: name.to_string(), p_value: None, p_values: vec![], verdict: Verdict::Skipped },
            }
        })
        .collect()
}

pub fn suite_csv(reports: &[TestReport]) -> String {
    let mut out = String::from("test,p_value,verdict\n");
    for r in reports {
        let p = r.p_value.map(|p| format!("{p:.6}")).unwrap_or_default();
        let _ = writeln!(out, "{},{},{}", r.test, p, r.verdict);
    }
    out
}
