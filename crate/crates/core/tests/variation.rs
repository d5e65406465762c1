use codic_core::variation::{esa_flip_rate, flip_rates_csv, PvSpec, RngSeed, VariationError, VariationModel};
use proptest::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn spec(pv: f64, t: f64) -> PvSpec {
    PvSpec::new(pv, t).unwrap()
}

/// Chi-squared p-value of counts against a uniform expectation.
fn uniformity_p(counts: &[u64]) -> f64 {
    let n: u64 = counts.iter().sum();
    let e = n as f64 / counts.len() as f64;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
    1.0 - ChiSquared::new((counts.len() - 1) as f64).unwrap().cdf(chi2)
}

#[test]
fn zero_variation_has_zero_offsets() {
    let s = VariationModel::default().sample(&spec(0.0, 30.0), RngSeed(3), 1000);
    assert!(s.iter().all(|x| x.sa_offset_v == 0.0));
}

#[test]
fn sampling_is_deterministic() {
    let m = VariationModel::default();
    assert_eq!(m.sample(&spec(4.0, 30.0), RngSeed(3), 500), m.sample(&spec(4.0, 30.0), RngSeed(3), 500));
    assert_ne!(m.sample(&spec(4.0, 30.0), RngSeed(3), 500), m.sample(&spec(4.0, 30.0), RngSeed(4), 500));
}

#[test]
fn empirical_sigma_matches_configuration() {
    let m = VariationModel::default();
    let sp = spec(4.0, 30.0);
    let s = m.sample(&sp, RngSeed(17), 100_000);
    let n = s.len() as f64;
    let mean = s.iter().map(|x| x.sa_offset_v).sum::<f64>() / n;
    let var = s.iter().map(|x| (x.sa_offset_v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let want = m.offset_sigma(&sp);
    assert!((var.sqrt() / want - 1.0).abs() < 0.02, "{} vs {want}", var.sqrt());
    assert!(s.iter().all(|x| x.read_noise_sigma_v >= 0.0));
}

#[test]
fn spec_bounds() {
    assert!(matches!(PvSpec::new(-1.0, 30.0), Err(VariationError::Pv(_))));
    assert!(matches!(PvSpec::new(4.0, 130.0), Err(VariationError::Temperature(_))));
    assert!(matches!(esa_flip_rate(spec(4.0, 30.0), 9_999, RngSeed(1)), Err(VariationError::TooFewSamples { .. })));
}

#[test]
fn esa_flip_rate_profile() {
    let seed = RngSeed(2024);
    let rates: Vec<_> = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0]
        .iter()
        .map(|&pv| esa_flip_rate(spec(pv, 30.0), 100_000, seed).unwrap())
        .collect();
    for r in &rates[..4] {
        assert_eq!(r.flips, 0, "pv {}", r.pv_percent);
        assert_eq!(r.metastable, 0);
    }
    for w in rates[2..].windows(2) {
        assert!(w[0].flip_rate <= w[1].flip_rate);
    }
    // Within one order of magnitude of 0.02% and 0.19%.
    let (r4, r5) = (rates[4].flip_rate, rates[5].flip_rate);
    assert!((0.0002 / 10.0..=0.0002 * 10.0).contains(&r4), "{r4}");
    assert!((0.0019 / 10.0..=0.0019 * 10.0).contains(&r5), "{r5}");
    assert!(flip_rates_csv(&rates).starts_with("pv_percent,temperature_c,n,flip_rate\n0,30,100000,0\n"));

    // Flips are spread uniformly over sample positions.
    let mut buckets = [0u64; 10];
    for &i in &rates[5].flip_indices {
        buckets[i * 10 / 100_000] += 1;
    }
    assert!(uniformity_p(&buckets) >= 0.01, "{buckets:?}");
}

#[test]
fn esa_temperature_sensitivity_is_bounded() {
    let seed = RngSeed(7);
    let cool = esa_flip_rate(spec(5.0, 30.0), 100_000, seed).unwrap().flip_rate;
    let hot = esa_flip_rate(spec(5.0, 85.0), 100_000, seed).unwrap().flip_rate;
    assert!(cool > 0.0);
    assert!(hot >= cool && hot < 10.0 * cool, "{cool} -> {hot}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    /// Offsets scale linearly with PV because the same draws are reused.
    #[test]
    fn offsets_scale_with_pv(seed in any::<u64>(), pv in 0.5f64..10.0) {
        let m = VariationModel::default();
        let a = m.sample(&spec(1.0, 30.0), RngSeed(seed), 64);
        let b = m.sample(&spec(pv, 30.0), RngSeed(seed), 64);
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((y.sa_offset_v - pv * x.sa_offset_v).abs() <= 1e-12);
        }
    }

    #[test]
    fn read_noise_is_clipped(seed in any::<u64>()) {
        let m = VariationModel::default();
        let mut s = m.sample(&spec(4.0, 30.0), RngSeed(seed), 256);
        m.realize_read_noise(&mut s, RngSeed(seed ^ 1));
        for x in &s {
            prop_assert!(x.read_noise_v.abs() <= m.noise_clip_sigma * x.read_noise_sigma_v + 1e-18);
        }
    }
}
