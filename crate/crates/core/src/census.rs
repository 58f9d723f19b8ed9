// SPDX-License-Identifier: Apache-2.0

use alloc::collections::BTreeMap;
use alloc::string::String;
use core::ops::Add;
use serde::{Deserialize, Serialize};

use crate::netlist::{GateKind, Netlist};

/// Primitive counts, overall and per block. Constant ties are free and not counted.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateCensus {
    pub counts: BTreeMap<GateKind, usize>,
    pub blocks: BTreeMap<String, BTreeMap<GateKind, usize>>,
}

impl GateCensus {
    pub fn from_counts(counts: impl IntoIterator<Item = (GateKind, usize)>) -> Self {
        let mut c = GateCensus::default();
        for (k, n) in counts {
            if n > 0 {
                *c.counts.entry(k).or_insert(0) += n;
            }
        }
        c
    }

    pub fn count(&self, kind: GateKind) -> usize {
        self.counts.get(&kind).copied().unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }

    pub fn dffs(&self) -> usize {
        self.count(GateKind::Dff)
    }

    pub fn block_total(&self, block: &str) -> usize {
        self.blocks.get(block).map_or(0, |b| b.values().sum())
    }

    pub fn block_count(&self, block: &str, kind: GateKind) -> usize {
        self.blocks.get(block).and_then(|b| b.get(&kind)).copied().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.total() == 0
    }
}

impl Add for &GateCensus {
    type Output = GateCensus;

    fn add(self, rhs: &GateCensus) -> GateCensus {
        let mut out = self.clone();
        for (k, n) in &rhs.counts {
            *out.counts.entry(*k).or_insert(0) += n;
        }
        for (b, counts) in &rhs.blocks {
            let dst = out.blocks.entry(b.clone()).or_default();
            for (k, n) in counts {
                *dst.entry(*k).or_insert(0) += n;
            }
        }
        out
    }
}

pub fn gate_census(nl: &Netlist) -> GateCensus {
    let mut c = GateCensus::default();
    for g in nl.gates() {
        *c.counts.entry(g.kind).or_insert(0) += 1;
        *c.blocks.entry(String::from(nl.block_name(g.block))).or_default().entry(g.kind).or_insert(0) += 1;
    }
    c
}
