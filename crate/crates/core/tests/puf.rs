use codic_core::circuit::{self, read_value, CellState, CircuitParams, ReadValue};
use codic_core::puf::{
    authenticate, build_subarray, eval_time, far_frr_experiment, histogram, histogram_csv, intra_inter_distributions,
    jaccard, median, respond, temperature_intra, AuthDecision, Challenge, EvalTimeModel, FilterPolicy, PufCalibration,
    PufError, PufMechanism, PufResponse, SubarrayModel, SEGMENT_BYTES,
};
use codic_core::signals::VariantName;
use codic_core::variation::{PvSpec, RngSeed, VariationSample};
use proptest::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

const ROW_CELLS: u64 = 65_536;

fn spec() -> PvSpec {
    PvSpec::new(4.0, 30.0).unwrap()
}

fn device(seed: u64, rows: u64) -> SubarrayModel {
    build_subarray(RngSeed(seed), rows * ROW_CELLS, spec(), &PufCalibration::default()).unwrap()
}

fn resp(v: &[u64]) -> PufResponse {
    PufResponse::from_addrs(v.to_vec())
}

#[test]
fn jaccard_examples() {
    assert_eq!(jaccard(&resp(&[1, 2, 3]), &resp(&[1, 2, 3])), 1.0);
    assert_eq!(jaccard(&resp(&[1, 2]), &resp(&[3, 4])), 0.0);
    assert_eq!(jaccard(&resp(&[1, 2, 3]), &resp(&[2, 3, 4])), 0.5);
    assert_eq!(jaccard(&resp(&[]), &resp(&[])), 1.0);
    assert_eq!(authenticate(&resp(&[4, 9]), &resp(&[4, 9])), AuthDecision::Accept);
    assert_eq!(authenticate(&resp(&[4, 9]), &resp(&[4])), AuthDecision::Reject);
}

#[test]
fn response_text_roundtrip() {
    let r = resp(&[7, 3, 100]);
    let text = r.to_text("seed=1\nsegment=0");
    assert!(text.starts_with("# seed=1\n# segment=0\n3\n7\n100\n"));
    assert_eq!(PufResponse::parse(&text).unwrap(), r);
    assert!(matches!(PufResponse::parse("5\n5\n"), Err(PufError::Parse { line: 2, .. })));
    assert!(matches!(PufResponse::parse("x\n"), Err(PufError::Parse { line: 1, .. })));
}

/// Flipped fraction against the Gaussian tail above the threshold.
#[test]
fn flipped_density_matches_gaussian_tail() {
    let sub = device(1, 1024);
    let c = PufCalibration::default();
    let sigma = c.variation.offset_sigma(&spec());
    let q = 1.0 - Normal::standard().cdf(c.threshold_v / sigma);
    let n = sub.n_cells() as f64;
    let got = sub.flipped_fraction();
    let se = (q * (1.0 - q) / n).sqrt();
    assert!((got - q).abs() < 4.0 * se, "{got} vs {q}");
    assert!((1e-4..=2.2e-3).contains(&got));
}

#[test]
fn flipped_cells_are_uniform_over_rows() {
    let sub = device(2, 1024);
    let mut buckets = [0u64; 16];
    for a in sub.flipped_cells() {
        buckets[(a * 16 / sub.n_cells()) as usize] += 1;
    }
    let n: u64 = buckets.iter().sum();
    let e = n as f64 / 16.0;
    let chi2: f64 = buckets.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
    let p = 1.0 - ChiSquared::new(15.0).unwrap().cdf(chi2);
    assert!(p >= 0.01, "{buckets:?} p={p}");
}

#[test]
fn zero_variation_has_no_flips() {
    let sub = build_subarray(RngSeed(1), 8 * ROW_CELLS, PvSpec::new(0.0, 30.0).unwrap(), &PufCalibration::default()).unwrap();
    assert_eq!(sub.flipped_cells().count(), 0);
    let r = respond(&sub, &Challenge::segment(0, SEGMENT_BYTES), &FilterPolicy::UNFILTERED, RngSeed(1)).unwrap();
    assert!(r.is_empty());
}

#[test]
fn build_is_deterministic_in_seed() {
    assert_eq!(device(5, 8).candidates(), device(5, 8).candidates());
    assert_ne!(device(5, 8).candidates(), device(6, 8).candidates());
    assert!(build_subarray(RngSeed(1), 1000, spec(), &PufCalibration::default()).is_err());
}

/// The subarray's decision rule matches playing PRECHARGE, SIG, ACTIVATE
/// through the circuit with the same offset and imbalance.
#[test]
fn decisions_match_circuit() {
    let sub = device(3, 16).with_noise_sigma(0.0);
    let ch = Challenge { segment_base: 0, segment_size: 16 * 8192 };
    let r = respond(&sub, &ch, &FilterPolicy::UNFILTERED, RngSeed(1)).unwrap();
    let p = CircuitParams { sa_imbalance_v: sub.circuit_imbalance_v(), ..CircuitParams::default() };
    let cmds = [
        (VariantName::Precharge.schedule(), 2.0),
        (VariantName::Sig.schedule(), 2.0),
        (VariantName::Activate.schedule(), 0.0),
    ];
    let minority = if sub.circuit_imbalance_v() < 0.0 { ReadValue::One } else { ReadValue::Zero };
    let mut checked = 0;
    for c in sub.candidates().iter().filter(|c| (c.offset_v - sub.calibration().threshold_v).abs() > 1e-3) {
        let v = VariationSample { sa_offset_v: sub.physical_offset_v(c), ..VariationSample::nominal() };
        let end = circuit::run_sequence(&cmds, CellState::precharged(0.0, &p), &p, &v).unwrap();
        assert_eq!(read_value(&end, &p) == minority, r.contains(c.addr), "cell {} offset {}", c.addr, c.offset_v);
        checked += 1;
    }
    assert!(checked > 100);
    // An untracked cell has an offset below the floor and reads the majority value.
    let v = VariationSample::nominal();
    let end = circuit::run_sequence(&cmds, CellState::precharged(p.vdd, &p), &p, &v).unwrap();
    assert_ne!(read_value(&end, &p), minority);
}

#[test]
fn noiseless_reads_ignore_filtering() {
    let sub = device(4, 8).with_noise_sigma(0.0);
    let ch = Challenge::segment(3, SEGMENT_BYTES);
    let one = respond(&sub, &ch, &FilterPolicy::UNFILTERED, RngSeed(1)).unwrap();
    let five = respond(&sub, &ch, &FilterPolicy::CODIC, RngSeed(2)).unwrap();
    assert_eq!(one, five);
    let d = intra_inter_distributions(&sub, 200, SEGMENT_BYTES, &FilterPolicy::UNFILTERED, RngSeed(3)).unwrap();
    assert!(d.intra.iter().all(|&j| j == 1.0));
}

#[test]
fn filtered_responses_are_stable() {
    let sub = device(5, 1024);
    let policy = FilterPolicy::CODIC;
    let mut stable = 0;
    for seg in 0..1024 {
        let ch = Challenge::segment(seg, SEGMENT_BYTES);
        let a = respond(&sub, &ch, &policy, RngSeed(10)).unwrap();
        let b = respond(&sub, &ch, &policy, RngSeed(11)).unwrap();
        if jaccard(&a, &b) >= 0.99 {
            stable += 1;
        }
    }
    assert!(stable as f64 >= 0.99 * 1024.0, "{stable}");
}

#[test]
fn unfiltered_repeat_exact_match_rate() {
    let sub = device(6, 1024);
    let mut same = 0;
    for i in 0..10_000u64 {
        let ch = Challenge::segment(i % 1024, SEGMENT_BYTES);
        let a = respond(&sub, &ch, &FilterPolicy::UNFILTERED, RngSeed(2 * i)).unwrap();
        let b = respond(&sub, &ch, &FilterPolicy::UNFILTERED, RngSeed(2 * i + 1)).unwrap();
        same += (a == b) as u32;
    }
    assert!(same >= 9_900, "{same}");
}

/// Inter-segment Jaccard against independent sparse sets of density p,
/// whose expected Jaccard is p / (2 - p).
#[test]
fn inter_jaccard_matches_independence() {
    let sub = device(7, 1024);
    let policy = FilterPolicy::CODIC;
    let n_seg = sub.segments(SEGMENT_BYTES);
    let total: usize = (0..n_seg)
        .map(|s| respond(&sub, &Challenge::segment(s, SEGMENT_BYTES), &policy, RngSeed(1)).unwrap().len())
        .sum();
    let p = total as f64 / sub.n_cells() as f64;
    let want = p / (2.0 - p);
    let d = intra_inter_distributions(&sub, 10_000, SEGMENT_BYTES, &policy, RngSeed(8)).unwrap();
    let n = d.inter.len() as f64;
    let mean = d.inter.iter().sum::<f64>() / n;
    let sd = (d.inter.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    assert!((mean - want).abs() <= 3.0 * sd / n.sqrt(), "{mean} vs {want} (se {})", sd / n.sqrt());
    assert!(median(&d.intra) >= 0.95);
    assert!(median(&d.inter) <= 0.05);
}

#[test]
fn stricter_filter_never_lowers_intra_median() {
    let sub = device(8, 256);
    let loose = intra_inter_distributions(&sub, 1000, SEGMENT_BYTES, &FilterPolicy::UNFILTERED, RngSeed(1)).unwrap();
    let strict = intra_inter_distributions(&sub, 1000, SEGMENT_BYTES, &FilterPolicy::CODIC, RngSeed(1)).unwrap();
    assert!(median(&strict.intra) >= median(&loose.intra));
}

#[test]
fn authentication_rates() {
    let sub = device(9, 1024);
    let r = far_frr_experiment(&sub, 10_000, SEGMENT_BYTES, RngSeed(4)).unwrap();
    assert_eq!(r.false_accepts, 0);
    assert_eq!(r.far, 0.0);
    assert!((0.003..=0.013).contains(&r.frr), "{}", r.frr);
}

#[test]
fn temperature_change_keeps_responses_similar() {
    let sub = device(10, 256);
    let j = temperature_intra(&sub, 1000, SEGMENT_BYTES, 55.0, &FilterPolicy::CODIC, RngSeed(5)).unwrap();
    assert!(median(&j) >= 0.9, "{}", median(&j));
}

#[test]
fn histogram_counts_every_pair() {
    let sub = device(11, 64);
    let d = intra_inter_distributions(&sub, 300, SEGMENT_BYTES, &FilterPolicy::CODIC, RngSeed(5)).unwrap();
    let h = histogram(&d, 20);
    assert_eq!(h.len(), 20);
    assert_eq!(h.iter().map(|b| b.intra_count).sum::<u64>(), 300);
    assert_eq!(h.iter().map(|b| b.inter_count).sum::<u64>(), 300);
    assert!(histogram_csv(&h).starts_with("bin_low,bin_high,intra_count,inter_count\n"));
}

#[test]
fn eval_time_table() {
    let f = |m: PufMechanism, n, t| eval_time(m, &FilterPolicy::new(n, t).unwrap(), SEGMENT_BYTES);
    let close = |a: f64, b: f64| (a - b).abs() < 1e-9;
    assert!(close(f(PufMechanism::LatencyPuf, 100, 91), 88.2));
    assert!(close(f(PufMechanism::PreLat, 5, 5), 7.95));
    assert!(close(f(PufMechanism::PreLat, 1, 1), 1.59));
    assert!(close(f(PufMechanism::CodicSig, 5, 5), 4.41));
    assert!(close(f(PufMechanism::CodicSig, 1, 1), 0.882));
    assert_eq!(format!("{:.2}", f(PufMechanism::CodicSig, 1, 1)), "0.88");
    assert!("sram".parse::<PufMechanism>().is_err());
    assert!(FilterPolicy::new(5, 6).is_err());
    assert!(FilterPolicy::new(5, 0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eval_time_is_linear(n in 1u32..200, rows in 1u64..64) {
        let m = EvalTimeModel::default();
        for mech in PufMechanism::ALL {
            let base = m.eval_time(mech, &FilterPolicy::new(1, 1).unwrap(), SEGMENT_BYTES);
            let t = m.eval_time(mech, &FilterPolicy::new(n, 1).unwrap(), rows * 8192);
            prop_assert!((t - base * n as f64 * rows as f64).abs() <= 1e-9 * t.max(1.0));
        }
    }

    #[test]
    fn raising_threshold_never_adds_cells(seed in any::<u64>(), n in 1u32..8, seg in 0u64..4) {
        let sub = device(12, 4);
        let ch = Challenge::segment(seg, SEGMENT_BYTES);
        let mut prev: Option<PufResponse> = None;
        for t in 1..=n {
            let r = respond(&sub, &ch, &FilterPolicy::new(n, t).unwrap(), RngSeed(seed)).unwrap();
            if let Some(p) = &prev {
                prop_assert!(r.addrs().iter().all(|a| p.contains(*a)));
            }
            prev = Some(r);
        }
    }

    #[test]
    fn responses_are_pure(seed in any::<u64>(), seg in 0u64..4) {
        let sub = device(13, 4);
        let ch = Challenge::segment(seg, SEGMENT_BYTES);
        let a = respond(&sub, &ch, &FilterPolicy::CODIC, RngSeed(seed)).unwrap();
        let b = respond(&sub, &ch, &FilterPolicy::CODIC, RngSeed(seed)).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!(a.addrs().windows(2).all(|w| w[0] < w[1]));
        prop_assert!(a.addrs().iter().all(|&x| x < ch.cells()));
    }
}
