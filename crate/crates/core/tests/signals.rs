use codic_core::signals::{
    count_variants, decode_mrs, encode_mrs, parse_schedule, schedule_to_toml, validate, ModeRegisterImage, MrsError,
    Rule, SignalEdgePair, SignalError, SignalId, SignalSchedule, VariantName,
};
use proptest::prelude::*;

/// Every (init, end) pair with init < end inside a 25 ns, 1 ns grid.
fn all_pairs() -> Vec<(u32, u32)> {
    (0..25).flat_map(|i| (i + 1..25).map(move |e| (i, e))).collect()
}

#[test]
fn variant_counts() {
    assert_eq!(count_variants(25, 1, 1).unwrap(), 300);
    assert_eq!(count_variants(25, 1, 4).unwrap(), 8_100_000_000);
    assert_eq!(count_variants(2, 1, 1).unwrap(), 1);
    assert_eq!(count_variants(50, 2, 1).unwrap(), 300);
    assert!(matches!(count_variants(25, 2, 1), Err(SignalError::WindowNotMultiple { .. })));
    assert!(count_variants(1, 1, 1).is_err());
    assert!(count_variants(25, 0, 1).is_err());
}

#[test]
fn enumeration_matches_count() {
    let valid = all_pairs()
        .into_iter()
        .filter(|&(i, e)| validate(&SignalSchedule::empty().with(SignalId::Eq, i, e)).is_valid())
        .count();
    assert_eq!(valid as u128, count_variants(25, 1, 1).unwrap());
    // Pairs with init >= end are all rejected.
    let bad = (0..25)
        .flat_map(|i| (0..=i).map(move |e| (i, e)))
        .filter(|&(i, e)| validate(&SignalSchedule::empty().with(SignalId::Eq, i, e)).is_valid())
        .count();
    assert_eq!(bad, 0);
}

#[test]
fn catalog_is_exact() {
    use SignalId::*;
    let e = |a, b| Some(SignalEdgePair::new(a, b));
    let expect: [(VariantName, [Option<SignalEdgePair>; 4]); 7] = [
        (VariantName::Activate, [e(5, 22), None, e(7, 22), e(7, 22)]),
        (VariantName::Precharge, [None, e(5, 11), None, None]),
        (VariantName::Sig, [e(5, 22), e(7, 22), None, None]),
        (VariantName::SigOpt, [e(5, 10), e(7, 10), None, None]),
        (VariantName::DetZero, [e(5, 22), None, e(14, 22), e(7, 22)]),
        (VariantName::DetOne, [e(5, 22), None, e(7, 22), e(14, 22)]),
        (VariantName::Esa, [e(5, 22), None, e(3, 22), e(3, 22)]),
    ];
    for (v, edges) in expect {
        let s = v.schedule();
        for (id, want) in [Wl, Eq, SenseP, SenseN].into_iter().zip(edges) {
            assert_eq!(s.get(id), want, "{v} {id}");
        }
        assert!(s.validate().is_valid(), "{v}");
    }
}

#[test]
fn validation_examples() {
    assert!(validate(&SignalSchedule::empty().with(SignalId::Wl, 5, 22)).is_valid());
    let r = validate(&SignalSchedule::empty().with(SignalId::Wl, 22, 5));
    assert!(r.has(Some(SignalId::Wl), Rule::InitNotBeforeEnd));
    assert!(r.to_string().contains("init >= end"));
    let r = validate(&SignalSchedule::empty().with(SignalId::Wl, 5, 30));
    assert!(r.has(Some(SignalId::Wl), Rule::EndOutsideWindow));
    assert!(r.to_string().contains("end outside window"));
    // One entry per violation.
    let r = validate(&SignalSchedule::empty().with(SignalId::Wl, 22, 5).with(SignalId::Eq, 5, 30));
    assert_eq!(r.violations.len(), 2);
}

#[test]
fn wl_register_layout() {
    let img = encode_mrs(&SignalSchedule::empty().with(SignalId::Wl, 5, 22)).unwrap();
    assert_eq!(img.fields[SignalId::Wl.index()], 0b00101_10110);
    assert_eq!(img.to_hex(), "0x2d80000000");
    assert_eq!(img.to_hex().len(), 12);
}

#[test]
fn mrs_exhaustive_roundtrip() {
    let mut mismatches = 0;
    let mut checked = 0;
    for id in SignalId::ALL {
        for (i, e) in all_pairs() {
            let s = SignalSchedule::empty().with(id, i, e);
            let img = encode_mrs(&s).unwrap();
            let back = decode_mrs(&img).unwrap();
            let text = ModeRegisterImage::parse(&img.to_string()).unwrap();
            if back != s || text != img {
                mismatches += 1;
            }
            checked += 1;
        }
    }
    assert_eq!(checked, 1200);
    assert_eq!(mismatches, 0);
}

#[test]
fn mrs_rejects_malformed_fields() {
    let img = ModeRegisterImage { fields: [0, 0, 0, 0], present: [true, false, false, false] };
    match decode_mrs(&img) {
        Err(MrsError::Field { signal: SignalId::Wl, reason }) => assert_eq!(reason, "init >= end"),
        other => panic!("{other:?}"),
    }
    let img = ModeRegisterImage { fields: [(5 << 5) | 25, 0, 0, 0], present: [true, false, false, false] };
    assert!(decode_mrs(&img).is_err());
    let img = ModeRegisterImage { fields: [0, 33, 0, 0], present: [false; 4] };
    assert!(decode_mrs(&img).is_err());
    assert!(encode_mrs(&SignalSchedule::empty().with(SignalId::Wl, 9, 3)).is_err());
    assert!(encode_mrs(&SignalSchedule::with_window(50, 2).with(SignalId::Wl, 2, 4)).is_err());
    assert!(ModeRegisterImage::parse("2d80000000").is_err());
    assert!(ModeRegisterImage::parse("0x1ffffffffff").is_err());
}

#[test]
fn toml_format() {
    let s = parse_schedule("[signal.wl]\ninit_ns = 5\nend_ns = 22\n").unwrap();
    assert_eq!(s, SignalSchedule::empty().with(SignalId::Wl, 5, 22));
    assert!(parse_schedule("[signal.xl]\ninit_ns = 5\nend_ns = 22\n").is_err());
    assert!(parse_schedule("[signal.wl]\ninit_ns = 5\nend_ns = 22\nslope = 1\n").is_err());
    // Parsing does not validate.
    let bad = parse_schedule("[signal.wl]\ninit_ns = 9\nend_ns = 4\n").unwrap();
    assert!(!bad.validate().is_valid());
}

fn edge() -> impl Strategy<Value = Option<(u32, u32)>> {
    prop::option::of((0u32..24).prop_flat_map(|i| (Just(i), i + 1..25)))
}

fn schedule() -> impl Strategy<Value = SignalSchedule> {
    [edge(), edge(), edge(), edge()].prop_map(|edges| {
        let mut s = SignalSchedule::empty();
        for (id, e) in SignalId::ALL.into_iter().zip(edges) {
            s.set(id, e.map(|(a, b)| SignalEdgePair::new(a, b)));
        }
        s
    })
}

proptest! {
    #[test]
    fn mrs_bijection_on_valid_schedules(s in schedule()) {
        prop_assert!(s.validate().is_valid());
        let img = encode_mrs(&s).unwrap();
        prop_assert_eq!(decode_mrs(&img).unwrap(), s);
        prop_assert_eq!(ModeRegisterImage::parse(&img.to_string()).unwrap(), img);
    }

    #[test]
    fn toml_roundtrip(s in schedule()) {
        prop_assert_eq!(parse_schedule(&schedule_to_toml(&s)).unwrap(), s);
    }

    #[test]
    fn validation_agrees_with_interval_rule(i in 0u32..40, e in 0u32..40) {
        let ok = validate(&SignalSchedule::empty().with(SignalId::SenseN, i, e)).is_valid();
        prop_assert_eq!(ok, i < e && e <= 24);
    }
}
