// SPDX-License-Identifier: Apache-2.0

use proptest::prelude::*;
use seqsvm_core::circuit::storage::{fold_mux_constants, naive_gate_count, naive_mux_tree, StorageSpec};

fn check(spec: &StorageSpec) {
    let folded = fold_mux_constants(spec);
    let naive = naive_mux_tree(spec);
    for k in 0..spec.row_count() {
        assert_eq!(folded.eval(k), spec.rows[k], "row {k}");
        assert_eq!(naive.eval(k), spec.rows[k], "row {k}");
    }
    assert!(folded.gate_count() <= naive_gate_count(spec));
    assert_eq!(naive.gate_count(), naive_gate_count(spec));
}

#[test]
fn every_table_up_to_four_rows_of_two_bits() {
    for n in 1..=4usize {
        let bits = 2 * n;
        for word in 0u32..(1 << bits) {
            let rows = (0..n).map(|k| (0..2).map(|b| (word >> (2 * k + b)) & 1 == 1).collect()).collect();
            check(&StorageSpec::new(rows).unwrap());
        }
    }
}

#[test]
fn every_single_bit_column_up_to_sixteen_rows() {
    for n in [5usize, 7, 8, 11, 16] {
        let limit: u64 = if n <= 11 { 1 << n } else { 1 << 12 };
        for word in 0..limit {
            let w = word.wrapping_mul(0x9e37_79b9_7f4a_7c15) >> (64 - n);
            let rows = (0..n).map(|k| vec![(w >> k) & 1 == 1]).collect();
            check(&StorageSpec::new(rows).unwrap());
        }
    }
}

#[test]
fn constant_columns_cost_nothing() {
    let spec = StorageSpec::new(vec![vec![true, false]; 9]).unwrap();
    let folded = fold_mux_constants(&spec);
    assert_eq!(folded.gate_count(), 0);
    assert_eq!(folded.constant_outputs(), 2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn folding_is_sound_and_never_grows(
        rows in (1usize..=16, 1usize..=16).prop_flat_map(|(n, w)| prop::collection::vec(prop::collection::vec(any::<bool>(), w), n))
    ) {
        check(&StorageSpec::new(rows).unwrap());
    }
}
