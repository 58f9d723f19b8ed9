// SPDX-License-Identifier: Apache-2.0

//! MUX-based read-only storage with hardwired rows.
//!
//! Row `k` is selected when the select bus equals `k`. The reference structure is
//! a full MUX2 tree per output bit whose level `j` switches on select bit `j`.
//! Because every leaf is a constant, the tree is folded bottom-up with
//!
//! ```text
//! mux(s, x, x) = x        (covers mux(s,0,0)=0, mux(s,1,1)=1 and identical subtrees)
//! mux(s, 0, 1) = s
//! mux(s, 1, 0) = !s
//! ```
//!
//! Select values at or above the row count never occur, so those leaves are
//! don't-cares and collapse into their sibling. Remaining nodes are hash-consed
//! across all output bits, so identical subtrees become one MUX2.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::fixed::ceil_log2;
use crate::netlist::{ComponentKind, NetId, Scope};
use crate::quantizer::QuantizedSvm;

/// Hardwired rows, one per classifier: the raw weight bits of `w_k1..w_km`
/// followed by the bias bits, each LSB first in two's complement.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StorageSpec {
    pub rows: Vec<Vec<bool>>,
}

impl StorageSpec {
    pub fn new(rows: Vec<Vec<bool>>) -> Result<Self> {
        let width = rows.first().map(Vec::len).ok_or_else(|| invalid("storage needs at least one row"))?;
        if rows.iter().any(|r| r.len() != width) {
            return Err(invalid("storage rows differ in width"));
        }
        Ok(StorageSpec { rows })
    }

    pub fn from_quantized(q: &QuantizedSvm) -> Self {
        let rows = q
            .weights
            .iter()
            .zip(&q.biases)
            .map(|(ws, &b)| {
                let mut row: Vec<bool> = ws.iter().flat_map(|&w| q.weight_format.to_bits(w)).collect();
                row.extend(q.bias_format.to_bits(b));
                row
            })
            .collect();
        StorageSpec { rows }
    }

    /// Inverse of [`StorageSpec::from_quantized`] for one row.
    pub fn decode_row(&self, q: &QuantizedSvm, k: usize) -> (Vec<i64>, i64) {
        let ww = q.weight_format.total_bits() as usize;
        let row = &self.rows[k];
        let weights = (0..q.m).map(|i| q.weight_format.from_bits(&row[i * ww..(i + 1) * ww])).collect();
        (weights, q.bias_format.from_bits(&row[q.m * ww..]))
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn width(&self) -> usize {
        self.rows[0].len()
    }

    /// Select bits needed to address every row (at least one).
    pub fn select_width(&self) -> u32 {
        ceil_log2(self.rows.len()).max(1)
    }

    /// Row seen by the unfolded tree for `select`; unused selects repeat the last row.
    pub fn naive_read(&self, select: usize) -> &[bool] {
        &self.rows[select.min(self.rows.len() - 1)]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MuxNode {
    Const(bool),
    /// Select bit `bit`, optionally inverted.
    Select {
        bit: u32,
        inverted: bool,
    },
    Mux {
        sel: u32,
        lo: u32,
        hi: u32,
    },
}

/// Folded storage logic: a shared DAG plus one root per output bit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MuxDag {
    pub select_width: u32,
    pub nodes: Vec<MuxNode>,
    pub outputs: Vec<u32>,
}

impl MuxDag {
    pub fn eval(&self, select: usize) -> Vec<bool> {
        let mut vals = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let v = match *node {
                MuxNode::Const(b) => b,
                MuxNode::Select { bit, inverted } => ((select >> bit) & 1 == 1) != inverted,
                MuxNode::Mux { sel, lo, hi } => {
                    if (select >> sel) & 1 == 1 {
                        vals[hi as usize]
                    } else {
                        vals[lo as usize]
                    }
                }
            };
            vals.push(v);
        }
        self.outputs.iter().map(|&o| vals[o as usize]).collect()
    }

    pub fn mux_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, MuxNode::Mux { .. })).count()
    }

    pub fn inverter_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, MuxNode::Select { inverted: true, .. })).count()
    }

    /// Primitive gates the DAG lowers to.
    pub fn gate_count(&self) -> usize {
        self.mux_count() + self.inverter_count()
    }

    /// Output bits driven by constants (no logic at all).
    pub fn constant_outputs(&self) -> usize {
        self.outputs.iter().filter(|&&o| matches!(self.nodes[o as usize], MuxNode::Const(_))).count()
    }

    /// Emits the DAG into `s`, driven by `select` (LSB first).
    pub fn lower(&self, s: &mut Scope<'_>, select: &[NetId]) -> Vec<NetId> {
        s.component(ComponentKind::MuxStorage, self.outputs.len() as u32);
        let mut nets: Vec<NetId> = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let net = match *node {
                MuxNode::Const(false) => NetId::ZERO,
                MuxNode::Const(true) => NetId::ONE,
                MuxNode::Select { bit, inverted: false } => select[bit as usize],
                MuxNode::Select { bit, inverted: true } => s.not(select[bit as usize]),
                MuxNode::Mux { sel, lo, hi } => s.mux2(select[sel as usize], nets[lo as usize], nets[hi as usize]),
            };
            nets.push(net);
        }
        self.outputs.iter().map(|&o| nets[o as usize]).collect()
    }
}

#[derive(Default)]
struct Interner {
    nodes: Vec<MuxNode>,
    index: BTreeMap<MuxNode, u32>,
}

impl Interner {
    fn intern(&mut self, node: MuxNode) -> u32 {
        if let Some(&i) = self.index.get(&node) {
            return i;
        }
        let i = self.nodes.len() as u32;
        self.nodes.push(node);
        self.index.insert(node, i);
        i
    }

    fn combine(&mut self, sel: u32, lo: Option<u32>, hi: Option<u32>) -> Option<u32> {
        let (lo, hi) = match (lo, hi) {
            (None, x) | (x, None) => return x,
            (Some(l), Some(h)) => (l, h),
        };
        if lo == hi {
            return Some(lo);
        }
        let node = match (self.nodes[lo as usize], self.nodes[hi as usize]) {
            (MuxNode::Const(false), MuxNode::Const(true)) => MuxNode::Select { bit: sel, inverted: false },
            (MuxNode::Const(true), MuxNode::Const(false)) => MuxNode::Select { bit: sel, inverted: true },
            _ => MuxNode::Mux { sel, lo, hi },
        };
        Some(self.intern(node))
    }
}

/// Folds the hardwired MUX tree of `spec` into minimal select-line logic.
pub fn fold_mux_constants(spec: &StorageSpec) -> MuxDag {
    let sw = spec.select_width();
    let leaves = 1usize << sw;
    let mut int = Interner::default();
    let c0 = int.intern(MuxNode::Const(false));
    let c1 = int.intern(MuxNode::Const(true));
    let outputs = (0..spec.width())
        .map(|bit| {
            let mut level: Vec<Option<u32>> =
                (0..leaves).map(|k| spec.rows.get(k).map(|r| if r[bit] { c1 } else { c0 })).collect();
            for sel in 0..sw {
                level = level.chunks(2).map(|p| int.combine(sel, p[0], p[1])).collect();
            }
            level[0].expect("row 0 always exists")
        })
        .collect();
    MuxDag { select_width: sw, nodes: int.nodes, outputs }
}

/// The unfolded reference: a full MUX2 tree per output bit, unused leaves
/// repeating the last row.
pub fn naive_mux_tree(spec: &StorageSpec) -> MuxDag {
    let sw = spec.select_width();
    let mut nodes = alloc::vec![MuxNode::Const(false), MuxNode::Const(true)];
    let outputs = (0..spec.width())
        .map(|bit| {
            let mut level: Vec<u32> = (0..1usize << sw).map(|k| spec.naive_read(k)[bit] as u32).collect();
            for sel in 0..sw {
                level = level
                    .chunks(2)
                    .map(|p| {
                        nodes.push(MuxNode::Mux { sel, lo: p[0], hi: p[1] });
                        (nodes.len() - 1) as u32
                    })
                    .collect();
            }
            level[0]
        })
        .collect();
    MuxDag { select_width: sw, nodes, outputs }
}

/// MUX2 count of the unfolded tree: `(2^sw - 1)` per output bit.
pub fn naive_gate_count(spec: &StorageSpec) -> usize {
    ((1usize << spec.select_width()) - 1) * spec.width()
}
