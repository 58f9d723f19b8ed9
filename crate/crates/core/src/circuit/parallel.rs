// SPDX-License-Identifier: Apache-2.0

//! Fully parallel baselines: every classifier gets its own weighted sum and the
//! whole decision settles in a single cycle.
//!
//! Weights are applied as constant buses to full array multipliers; no constant
//! propagation is done, matching the reference cost of a parallel design.

use alloc::vec::Vec;

use super::arith::{adder_tree, array_multiply, const_bus, extend, greater_than, Bus};
use super::sequential::{counter_width, design_info};
use crate::netlist::{ComponentKind, DesignKind, NetId, Netlist, Scope};
use crate::quantizer::QuantizedSvm;
use crate::trainer::Strategy;

pub const CLASSIFIERS: &str = "classifiers";
pub const ARGMAX: &str = "argmax";
pub const VOTES: &str = "votes";

/// Builds the parallel reference for `q`.
///
/// With [`Strategy::OneVsRest`] the design is functionally identical to the
/// sequential one. [`Strategy::OneVsOne`] gives a shape-only design with
/// `n(n-1)/2` classifiers, sign votes and a tally; pair `(a, b)` reuses the
/// weights of class `a` as a stand-in, since only its size is of interest.
pub fn build_parallel_baseline(q: &QuantizedSvm, strategy: Strategy) -> Netlist {
    match strategy {
        Strategy::OneVsRest => build_ovr(q),
        Strategy::OneVsOne => build_ovo_shape(q),
    }
}

fn weighted_sum(s: &mut Scope<'_>, q: &QuantizedSvm, x: &[NetId], k: usize) -> Bus {
    let iw = q.input_format.total_bits() as usize;
    let ww = q.weight_format.total_bits() as usize;
    let bw = q.bias_format.total_bits() as usize;
    let acc_w = q.accumulator_width as usize;
    s.component(ComponentKind::WeightedSum, acc_w as u32);
    let mut operands: Vec<Bus> = (0..q.m)
        .map(|i| {
            let w = const_bus(q.weights[k][i], ww);
            extend(&array_multiply(s, &x[i * iw..(i + 1) * iw], &w), acc_w, true)
        })
        .collect();
    operands.push(extend(&const_bus(q.biases[k], bw), acc_w, true));
    adder_tree(s, operands)
}

/// Balanced argmax tree. At every node the right-hand (higher index) entry
/// wins only when strictly greater, so ties resolve to the smallest index.
fn argmax_tree(s: &mut Scope<'_>, values: &[Bus], signed: bool, id_width: usize) -> Bus {
    let mut level: Vec<(Bus, Bus)> =
        values.iter().enumerate().map(|(k, v)| (v.clone(), const_bus(k as i64, id_width))).collect();
    while level.len() > 1 {
        let mut next = Vec::with_capacity(level.len().div_ceil(2));
        let mut it = level.into_iter();
        while let Some((lv, lid)) = it.next() {
            match it.next() {
                Some((rv, rid)) => {
                    let gt = greater_than(s, &rv, &lv, signed);
                    let v = lv.iter().zip(&rv).map(|(&a, &b)| s.mux2(gt, a, b)).collect();
                    let id = lid.iter().zip(&rid).map(|(&a, &b)| if a == b { a } else { s.mux2(gt, a, b) }).collect();
                    next.push((v, id));
                }
                None => next.push((lv, lid)),
            }
        }
        level = next;
    }
    level.pop().unwrap().1
}

fn build_ovr(q: &QuantizedSvm) -> Netlist {
    let info = design_info(q, DesignKind::ParallelOvr);
    let mut nl = Netlist::new("seqsvm_parallel_ovr", info);
    let x = nl.add_input("x", q.m * info.input_width as usize);
    let mut s = nl.scope(CLASSIFIERS);
    let scores: Vec<Bus> = (0..q.n).map(|k| weighted_sum(&mut s, q, &x, k)).collect();
    let id = argmax_tree(&mut nl.scope(ARGMAX), &scores, true, counter_width(q.n) as usize);
    nl.add_output("class_id", id);
    nl.add_output("done", alloc::vec![NetId::ONE]);
    nl
}

fn build_ovo_shape(q: &QuantizedSvm) -> Netlist {
    let info = design_info(q, DesignKind::ParallelOvoShape);
    let mut nl = Netlist::new("seqsvm_parallel_ovo_shape", info);
    let x = nl.add_input("x", q.m * info.input_width as usize);
    let tally_w = counter_width(q.n) as usize + 1;
    let mut votes: Vec<Vec<Bus>> = alloc::vec![Vec::new(); q.n];
    let mut s = nl.scope(CLASSIFIERS);
    for a in 0..q.n {
        for b in a + 1..q.n {
            let score = weighted_sum(&mut s, q, &x, a);
            let sign = *score.last().unwrap();
            let pos = s.not(sign);
            votes[a].push(extend(&[pos], tally_w, false));
            votes[b].push(extend(&[sign], tally_w, false));
        }
    }
    let mut s = nl.scope(VOTES);
    let tallies: Vec<Bus> = votes.into_iter().map(|v| adder_tree(&mut s, v)).collect();
    let id = argmax_tree(&mut nl.scope(ARGMAX), &tallies, false, counter_width(q.n) as usize);
    nl.add_output("class_id", id);
    nl.add_output("done", alloc::vec![NetId::ONE]);
    nl
}
