// SPDX-License-Identifier: Apache-2.0

#![allow(dead_code)]

use proptest::prelude::*;
use seqsvm_core::quantizer::accumulator_width;
use seqsvm_core::{FixedFormat, QuantizedSvm};

/// Model with u0.4 inputs and the given weight and bias formats; biases are
/// aligned to the product scale.
pub fn model(weight: FixedFormat, bias_int: u32, weights: Vec<Vec<i64>>, biases: Vec<i64>) -> QuantizedSvm {
    let input = FixedFormat::unsigned(0, 4);
    let bias = FixedFormat::signed(bias_int, input.fraction_bits + weight.fraction_bits);
    let m = weights[0].len();
    let q = QuantizedSvm {
        m,
        n: weights.len(),
        input_format: input,
        weight_format: weight,
        bias_format: bias,
        accumulator_width: accumulator_width(m, &input, &weight, &bias),
        weights,
        biases,
    };
    q.validate().unwrap();
    q
}

/// Random valid model with `n` classes and `m` features.
pub fn arb_model(n: usize, m: usize) -> impl Strategy<Value = QuantizedSvm> {
    (0u32..3, 1u32..5, 0u32..3).prop_flat_map(move |(wi, wf, bi)| {
        let wfmt = FixedFormat::signed(wi, wf);
        let bfmt = FixedFormat::signed(bi, 4 + wf);
        (
            prop::collection::vec(prop::collection::vec(wfmt.min_raw()..=wfmt.max_raw(), m), n),
            prop::collection::vec(bfmt.min_raw()..=bfmt.max_raw(), n),
        )
            .prop_map(move |(w, b)| model(wfmt, bi, w, b))
    })
}

pub fn arb_input(m: usize) -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(0i64..16, m)
}
