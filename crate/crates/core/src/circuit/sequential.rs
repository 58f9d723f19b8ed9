// SPDX-License-Identifier: Apache-2.0

//! The sequential architecture: one classifier evaluated per clock cycle.
//!
//! ```text
//!   control --select--> storage --row--> engine --score--> voter --> class_id
//!      |                                                     ^
//!      +------------------- counter, done -------------------+
//! ```
//!
//! Cycle `k` after reset presents row `k` to the engine; the voter latches the
//! score and counter value when the score is strictly greater than its stored
//! score. On the edge that ends cycle `n - 1` the done flag sets, freezing the
//! counter and voter, so done is observed high exactly `n` cycles after reset.

use alloc::vec::Vec;

use super::arith::{adder_tree, array_multiply, equals_const, extend, greater_than, increment};
use super::storage::{fold_mux_constants, StorageSpec};
use crate::fixed::ceil_log2;
use crate::netlist::{ComponentKind, DesignInfo, DesignKind, NetId, Netlist};
use crate::quantizer::QuantizedSvm;

pub const CONTROL: &str = "control";
pub const STORAGE: &str = "storage";
pub const ENGINE: &str = "engine";
pub const VOTER: &str = "voter";

/// Select bits for `n` rows: `ceil(log2(n))`, never less than one.
pub fn counter_width(n: usize) -> u32 {
    ceil_log2(n).max(1)
}

pub fn design_info(q: &QuantizedSvm, kind: DesignKind) -> DesignInfo {
    DesignInfo {
        kind,
        m: q.m,
        n: q.n,
        input_width: q.input_format.total_bits(),
        weight_width: q.weight_format.total_bits(),
        bias_width: q.bias_format.total_bits(),
        accumulator_width: q.accumulator_width,
        counter_width: counter_width(q.n),
    }
}

pub fn build_sequential(q: &QuantizedSvm) -> Netlist {
    let info = design_info(q, DesignKind::Sequential);
    let mut nl = Netlist::new("seqsvm_sequential", info);
    let iw = info.input_width as usize;
    let acc_w = info.accumulator_width as usize;
    let cw = info.counter_width as usize;

    let x = nl.add_input("x", q.m * iw);

    // control: counter with terminal count and a sticky done flag
    let mut s = nl.scope(CONTROL);
    s.component(ComponentKind::Counter, cw as u32);
    let (cnt_ffs, cnt): (Vec<_>, Vec<_>) = (0..cw).map(|_| s.dff(false)).unzip();
    let (done_ff, done) = s.dff(false);
    let tc = equals_const(&mut s, &cnt, (q.n - 1) as u64);
    let hold = s.or2(done, tc);
    let advance = s.not(hold);
    let next = increment(&mut s, &cnt, advance);
    for (ff, d) in cnt_ffs.into_iter().zip(next) {
        s.connect(ff, d);
    }
    s.connect(done_ff, hold);
    let running = s.not(done);

    // storage: hardwired rows folded over the counter bits
    let spec = StorageSpec::from_quantized(q);
    let dag = fold_mux_constants(&spec);
    let row = dag.lower(&mut nl.scope(STORAGE), &cnt);

    // engine: m multipliers and one adder tree over the products plus bias
    let weighted_sum = engine(&mut nl, q, &x, &row);

    // voter: score and id registers behind one signed comparator
    let mut s = nl.scope(VOTER);
    s.component(ComponentKind::Register, acc_w as u32);
    s.component(ComponentKind::Register, cw as u32);
    let (score_ffs, score): (Vec<_>, Vec<_>) = (0..acc_w).map(|i| s.dff(i + 1 == acc_w)).unzip();
    let (id_ffs, id): (Vec<_>, Vec<_>) = (0..cw).map(|_| s.dff(false)).unzip();
    let greater = greater_than(&mut s, &weighted_sum, &score, true);
    let update = s.and2(greater, running);
    for ((ff, &q_bit), &d) in score_ffs.into_iter().zip(&score).zip(&weighted_sum) {
        let next = s.mux2(update, q_bit, d);
        s.connect(ff, next);
    }
    for ((ff, &q_bit), &d) in id_ffs.into_iter().zip(&id).zip(&cnt) {
        let next = s.mux2(update, q_bit, d);
        s.connect(ff, next);
    }

    nl.add_output("class_id", id.clone());
    nl.add_output("done", alloc::vec![done]);
    nl.set_probe("counter", cnt);
    nl.set_probe("row", row);
    nl.set_probe("acc", weighted_sum);
    nl.set_probe("score", score);
    nl.set_probe("id", id);
    nl.set_probe("done", alloc::vec![done]);
    nl
}

/// The compute engine. Its structure depends only on `m` and the operand and
/// accumulator widths, never on `n` or on the stored values.
pub(crate) fn engine(nl: &mut Netlist, q: &QuantizedSvm, x: &[NetId], row: &[NetId]) -> Vec<NetId> {
    let iw = q.input_format.total_bits() as usize;
    let ww = q.weight_format.total_bits() as usize;
    let acc_w = q.accumulator_width as usize;
    let mut s = nl.scope(ENGINE);
    let mut operands: Vec<Vec<NetId>> = (0..q.m)
        .map(|i| {
            let p = array_multiply(&mut s, &x[i * iw..(i + 1) * iw], &row[i * ww..(i + 1) * ww]);
            extend(&p, acc_w, true)
        })
        .collect();
    operands.push(extend(&row[q.m * ww..], acc_w, true));
    adder_tree(&mut s, operands)
}
