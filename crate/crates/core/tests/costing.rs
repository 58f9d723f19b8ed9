// SPDX-License-Identifier: Apache-2.0

mod common;

use proptest::prelude::*;
use seqsvm_core::cost::{calibrate, energy_mj, estimate, estimate_netlist, CalibrationPoint};
use seqsvm_core::rng::Lcg64;
use seqsvm_core::{build_sequential, gate_census, FixedFormat, GateCensus, GateKind, TechFile};

fn arb_census() -> impl Strategy<Value = GateCensus> {
    prop::collection::vec(0usize..500, GateKind::ALL.len())
        .prop_filter("non-empty", |c| c.iter().any(|&v| v > 0))
        .prop_map(|counts| GateCensus::from_counts(GateKind::ALL.into_iter().zip(counts)))
}

proptest! {
    #[test]
    fn adding_gates_never_lowers_area_or_power(a in arb_census(), b in arb_census(), cp in 1.0f64..500.0) {
        let tech = TechFile::default();
        let ra = estimate(&a, cp, 3, &tech, None).unwrap();
        let sum = &a + &b;
        let rs = estimate(&sum, cp, 3, &tech, None).unwrap();
        prop_assert!(rs.area_cm2 >= ra.area_cm2);
        prop_assert!(rs.power_mw >= ra.power_mw);
    }

    #[test]
    fn area_scales_linearly(c in arb_census(), alpha in 0.1f64..10.0) {
        let tech = TechFile::default();
        let base = estimate(&c, 10.0, 1, &tech, None).unwrap();
        let scaled = estimate(&c, 10.0, 1, &tech.scaled(alpha, 1.0, 1.0), None).unwrap();
        prop_assert!((scaled.area_cm2 - alpha * base.area_cm2).abs() <= 1e-9 * scaled.area_cm2.max(1.0));
        prop_assert_eq!(scaled.power_mw, base.power_mw);
    }

    #[test]
    fn energy_identity_is_exact(c in arb_census(), cp in 1.0f64..500.0, cycles in 1usize..20, target in prop::option::of(0.5f64..200.0)) {
        let r = estimate(&c, cp, cycles, &TechFile::default(), target).unwrap();
        prop_assert_eq!(r.energy_mj, energy_mj(r.power_mw, r.latency_ms));
        prop_assert_eq!(r.latency_ms, cycles as f64 / r.freq_hz * 1000.0);
        prop_assert!(r.freq_hz <= r.f_max_hz);
    }
}

#[test]
fn a_longer_path_never_raises_f_max() {
    let mut rng = Lcg64::new(1);
    let w = FixedFormat::signed(1, 3);
    let pick = |rng: &mut Lcg64, lo: i64, hi: i64| lo + rng.below((hi - lo + 1) as usize) as i64;
    let weights: Vec<Vec<i64>> = (0..4).map(|_| (0..6).map(|_| pick(&mut rng, -16, 15)).collect()).collect();
    let q = common::model(w, 1, weights, vec![0; 4]);
    let nl = build_sequential(&q);
    let tech = TechFile::default();
    let base = estimate_netlist(&nl, 4, &tech, None).unwrap();
    let slow = estimate_netlist(&nl, 4, &tech.scaled(1.0, 1.0, 1.5), None).unwrap();
    assert!(slow.f_max_hz < base.f_max_hz);
    let census = gate_census(&nl);
    let more = &census + &GateCensus::from_counts([(GateKind::Dff, 1)]);
    let cp = 1000.0 / base.f_max_hz;
    assert_eq!(estimate(&more, cp, 4, &tech, None).unwrap().f_max_hz, base.f_max_hz);
}

#[test]
fn clock_rate_barely_depends_on_class_count() {
    let mut rng = Lcg64::new(2);
    let w = FixedFormat::signed(1, 4);
    let tech = TechFile::default();
    for m in [11usize, 16, 21, 34] {
        let f = |n: usize, rng: &mut Lcg64| {
            let weights = (0..n).map(|_| (0..m).map(|_| rng.below(64) as i64 - 32).collect()).collect();
            let q = common::model(w, 1, weights, vec![0; n]);
            estimate_netlist(&build_sequential(&q), n, &tech, None).unwrap().f_max_hz
        };
        let (f3, f10) = (f(3, &mut rng), f(10, &mut rng));
        assert!((f3 - f10).abs() / f3 <= 0.05, "m={m}: {f3} vs {f10}");
    }
}

#[test]
fn calibration_recovers_known_scales() {
    let tech = TechFile::default();
    let p = CalibrationPoint {
        area_cm2: 10.0,
        power_mw: 20.0,
        f_max_hz: 5.0,
        target_area_cm2: 25.0,
        target_power_mw: 10.0,
        target_freq_hz: 20.0,
    };
    let (cal, [a, pw, d]) = calibrate(&tech, &[p]).unwrap();
    assert!((a - 2.5).abs() < 1e-12 && (pw - 0.5).abs() < 1e-12 && (d - 0.25).abs() < 1e-12);
    let not = cal.cost(GateKind::Not);
    assert!((not.area_cm2 - 2.5 * tech.cost(GateKind::Not).area_cm2).abs() < 1e-12);
}
