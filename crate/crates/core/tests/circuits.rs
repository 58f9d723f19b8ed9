// SPDX-License-Identifier: Apache-2.0

mod common;

use proptest::prelude::*;
use seqsvm_core::circuit::sequential::{counter_width, ENGINE, STORAGE, VOTER};
use seqsvm_core::circuit::storage::StorageSpec;
use seqsvm_core::netlist::ComponentKind;
use seqsvm_core::rng::Lcg64;
use seqsvm_core::trainer::argmax_first;
use seqsvm_core::{
    build_parallel_baseline, build_sequential, equivalence_check, gate_census, measured_latency_cycles,
    quantized_scores, simulate, Dataset, FixedFormat, GateKind, QuantizedSvm, Strategy as Scheme,
};

fn random_model(rng: &mut Lcg64, n: usize, m: usize, weight: FixedFormat, bias_int: u32) -> QuantizedSvm {
    let bias = FixedFormat::signed(bias_int, 4 + weight.fraction_bits);
    let pick =
        |rng: &mut Lcg64, f: &FixedFormat| f.min_raw() + rng.below((f.max_raw() - f.min_raw() + 1) as usize) as i64;
    let weights = (0..n).map(|_| (0..m).map(|_| pick(rng, &weight)).collect()).collect();
    let biases = (0..n).map(|_| pick(rng, &bias)).collect();
    common::model(weight, bias_int, weights, biases)
}

fn raw_dataset(q: &QuantizedSvm, inputs: &[Vec<i64>]) -> Dataset {
    let scale = q.input_format.scale();
    let rows = inputs.iter().map(|x| x.iter().map(|&v| v as f64 / scale).collect()).collect();
    let labels = (0..inputs.len()).map(|i| i % q.n).collect();
    Dataset::from_rows("raw", q.n, rows, labels).unwrap()
}

#[test]
fn random_small_model_fuzz() {
    let mut rng = Lcg64::new(7);
    let q = random_model(&mut rng, 4, 5, FixedFormat::signed(1, 2), 1);
    let inputs: Vec<Vec<i64>> = (0..1000).map(|_| (0..5).map(|_| rng.below(16) as i64).collect()).collect();
    let report = equivalence_check(&q, &build_sequential(&q), &raw_dataset(&q, &inputs)).unwrap();
    assert_eq!(report.samples, 1000);
    assert_eq!(report.class_mismatches, 0);
    assert_eq!(report.accumulator_checks, 4000);
    assert!(report.passed());
    assert!(report.latency_cycles.iter().all(|&c| c == 4));
}

#[test]
fn corrupted_storage_bit_is_caught() {
    let mut rng = Lcg64::new(11);
    let q = random_model(&mut rng, 4, 5, FixedFormat::signed(1, 2), 1);
    let mut bad = q.clone();
    let spec = StorageSpec::from_quantized(&q);
    let mut rows = spec.rows.clone();
    let bias_lsb = q.m * q.weight_format.total_bits() as usize;
    rows[2][bias_lsb] = !rows[2][bias_lsb];
    let (_, b) = StorageSpec::new(rows).unwrap().decode_row(&q, 2);
    bad.biases[2] = b;
    let inputs: Vec<Vec<i64>> = (0..64).map(|_| (0..5).map(|_| rng.below(16) as i64).collect()).collect();
    let report = equivalence_check(&q, &build_sequential(&bad), &raw_dataset(&q, &inputs)).unwrap();
    assert!(!report.passed());
    let cex = report.first_counterexample.expect("counterexample");
    assert_eq!(cex.cycle, Some(2));
    assert_eq!((cex.expected - cex.observed).abs(), 1);
}

#[test]
fn engine_does_not_depend_on_n() {
    let mut rng = Lcg64::new(3);
    let w = FixedFormat::signed(1, 3);
    let census: Vec<_> = [3usize, 6, 10, 16]
        .iter()
        .map(|&n| {
            let nl = build_sequential(&random_model(&mut rng, n, 7, w, 1));
            assert_eq!(nl.count_components(ComponentKind::Multiplier, Some(ENGINE)), 7, "n={n}");
            let c = gate_census(&nl);
            GateKind::ALL.map(|k| c.block_count(ENGINE, k))
        })
        .collect();
    assert!(census.windows(2).all(|p| p[0] == p[1]), "{census:?}");
}

#[test]
fn voter_is_one_comparator_and_two_registers() {
    let mut rng = Lcg64::new(5);
    for n in [2usize, 3, 6, 7, 10, 16] {
        let q = random_model(&mut rng, n, 4, FixedFormat::signed(0, 3), 0);
        let nl = build_sequential(&q);
        let c = gate_census(&nl);
        assert_eq!(nl.count_components(ComponentKind::Comparator, Some(VOTER)), 1);
        assert_eq!(c.block_count(VOTER, GateKind::Dff), (q.accumulator_width + counter_width(n)) as usize);
        assert_eq!(nl.count_components(ComponentKind::MuxStorage, Some(STORAGE)), 1);
    }
}

#[test]
fn storage_and_multiplier_ratios() {
    let mut rng = Lcg64::new(9);
    for n in 3..=10usize {
        let q = random_model(&mut rng, n, 5, FixedFormat::signed(1, 2), 1);
        let seq = build_sequential(&q);
        let ovr = build_parallel_baseline(&q, Scheme::OneVsRest);
        let ovo = build_parallel_baseline(&q, Scheme::OneVsOne);
        let rows = StorageSpec::from_quantized(&q).row_count();
        let blocks = ovo.count_components(ComponentKind::WeightedSum, None);
        assert_eq!(rows, n);
        assert_eq!(blocks, n * (n - 1) / 2);
        assert!((rows as f64 / blocks as f64 - 2.0 / (n as f64 - 1.0)).abs() < 1e-12);
        let seq_mult = seq.count_components(ComponentKind::Multiplier, None);
        let par_mult = ovr.count_components(ComponentKind::Multiplier, None);
        assert_eq!(seq_mult, q.m);
        assert_eq!(par_mult, n * seq_mult);
        let gates = |nl: &seqsvm_core::Netlist, block: &str| gate_census(nl).block_total(block) as f64;
        let seq_engine = gates(&seq, ENGINE);
        let par_engine = gates(&ovr, seqsvm_core::circuit::parallel::CLASSIFIERS);
        assert!(par_engine >= 0.8 * n as f64 * seq_engine, "n={n}: {par_engine} vs {seq_engine}");
    }
}

#[test]
fn parallel_baselines_agree_with_the_golden_model() {
    let mut rng = Lcg64::new(13);
    let q = random_model(&mut rng, 5, 3, FixedFormat::signed(1, 2), 1);
    let nl = build_parallel_baseline(&q, Scheme::OneVsRest);
    for _ in 0..200 {
        let x: Vec<i64> = (0..3).map(|_| rng.below(16) as i64).collect();
        let (class, trace) = simulate(&nl, &x, 4).unwrap();
        assert_eq!(class, q.predict_raw(&x).unwrap());
        assert_eq!(measured_latency_cycles(&trace), 0);
    }
}

#[test]
fn generated_designs_validate() {
    let mut rng = Lcg64::new(17);
    for n in 2..=8usize {
        let q = random_model(&mut rng, n, 3, FixedFormat::signed(2, 2), 2);
        for nl in [
            build_sequential(&q),
            build_parallel_baseline(&q, Scheme::OneVsRest),
            build_parallel_baseline(&q, Scheme::OneVsOne),
        ] {
            nl.validate().unwrap();
            nl.comb_order().unwrap();
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn voter_ties_resolve_to_the_smallest_index(
        n in 2usize..=8,
        m in 1usize..=3,
        seed in any::<u64>(),
    ) {
        let mut rng = Lcg64::new(seed);
        // Few distinct scores, so most cases contain exact ties at the maximum.
        let weights: Vec<Vec<i64>> = (0..n).map(|_| (0..m).map(|_| rng.below(2) as i64).collect()).collect();
        let biases: Vec<i64> = (0..n).map(|_| 16 * rng.below(3) as i64).collect();
        let q = common::model(FixedFormat::signed(1, 0), 2, weights, biases);
        let x: Vec<i64> = (0..m).map(|_| 15 * rng.below(2) as i64).collect();
        let scores = quantized_scores(&q, &x).unwrap();
        let (class, _) = simulate(&build_sequential(&q), &x, n + 2).unwrap();
        prop_assert_eq!(class, argmax_first(&scores));
        let best = scores[class];
        prop_assert!(scores[..class].iter().all(|&s| s < best));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn done_after_exactly_n_cycles(
        (q, x) in (2usize..=16).prop_flat_map(|n| (common::arb_model(n, 3), common::arb_input(3)))
    ) {
        let nl = build_sequential(&q);
        let (class, trace) = simulate(&nl, &x, q.n + 2).unwrap();
        prop_assert_eq!(measured_latency_cycles(&trace), q.n);
        prop_assert_eq!(class, q.predict_raw(&x).unwrap());
        let scores = quantized_scores(&q, &x).unwrap();
        for (k, rec) in trace.working().iter().enumerate() {
            prop_assert_eq!(rec.counter, k as u64);
            prop_assert_eq!(rec.accumulator, scores[k]);
        }
        let (_, again) = simulate(&nl, &x, q.n + 2).unwrap();
        prop_assert_eq!(again, trace);
    }
}
