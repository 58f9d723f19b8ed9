// SPDX-License-Identifier: Apache-2.0

//! Two-phase cycle simulation.
//!
//! Each cycle first settles every combinational gate in topological order, then
//! clocks all DFFs at once. Nets hold 64 lanes, one independent sample per bit,
//! so a batch of up to 64 inputs runs in a single pass over the gate list.

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{check_dim, Error, Result};
use crate::netlist::{GateId, GateKind, NetId, Netlist};
use crate::quantizer::QuantizedSvm;
use crate::trainer::argmax_first;

pub const LANES: usize = 64;

/// Lane-parallel simulator bound to one netlist.
pub struct Simulator<'a> {
    nl: &'a Netlist,
    order: Vec<GateId>,
    dffs: Vec<GateId>,
    values: Vec<u64>,
}

impl<'a> Simulator<'a> {
    pub fn new(nl: &'a Netlist) -> Result<Self> {
        let order = nl.comb_order()?;
        let dffs = nl.dffs().map(|(id, _)| id).collect();
        let mut values = alloc::vec![0u64; nl.net_count()];
        values[NetId::ONE.index()] = u64::MAX;
        let mut sim = Simulator { nl, order, dffs, values };
        sim.reset();
        Ok(sim)
    }

    pub fn netlist(&self) -> &Netlist {
        self.nl
    }

    /// Loads every DFF with its reset value.
    pub fn reset(&mut self) {
        for &id in &self.dffs {
            let g = self.nl.gate(id);
            self.values[g.output.index()] = if g.init { u64::MAX } else { 0 };
        }
    }

    /// Drives input port `port` with one word per lane (lane `l` gets `words[l]`).
    pub fn set_input(&mut self, port: usize, words: &[u64]) {
        let nets = &self.nl.inputs()[port].nets;
        for (bit, net) in nets.iter().enumerate() {
            let mut v = 0u64;
            for (lane, &w) in words.iter().enumerate().take(LANES) {
                v |= ((w >> bit) & 1) << lane;
            }
            self.values[net.index()] = v;
        }
    }

    /// Drives the concatenated feature port from per-lane raw feature vectors.
    pub fn set_features(&mut self, lanes: &[&[i64]]) -> Result<()> {
        let port = &self.nl.inputs()[0];
        let info = self.nl.info;
        check_dim(info.m * info.input_width as usize, port.nets.len())?;
        let iw = info.input_width as usize;
        for net in &port.nets {
            self.values[net.index()] = 0;
        }
        for (lane, x) in lanes.iter().enumerate() {
            check_dim(info.m, x.len())?;
            for (i, &v) in x.iter().enumerate() {
                for b in 0..iw {
                    let bit = ((v >> b) & 1) as u64;
                    self.values[port.nets[i * iw + b].index()] |= bit << lane;
                }
            }
        }
        Ok(())
    }

    /// Settles combinational logic for the current inputs and state.
    pub fn settle(&mut self) {
        for &id in &self.order {
            let g = self.nl.gate(id);
            let ins = g.inputs();
            let v = |n: NetId| self.values[n.index()];
            let out = match g.kind {
                GateKind::And2 => v(ins[0]) & v(ins[1]),
                GateKind::Or2 => v(ins[0]) | v(ins[1]),
                GateKind::Nand2 => !(v(ins[0]) & v(ins[1])),
                GateKind::Nor2 => !(v(ins[0]) | v(ins[1])),
                GateKind::Xor2 => v(ins[0]) ^ v(ins[1]),
                GateKind::Not => !v(ins[0]),
                GateKind::Mux2 => {
                    let s = v(ins[0]);
                    (v(ins[1]) & !s) | (v(ins[2]) & s)
                }
                GateKind::Dff => unreachable!("DFFs are not in the combinational order"),
            };
            self.values[g.output.index()] = out;
        }
    }

    /// Clock edge: every DFF samples its settled `d` input simultaneously.
    pub fn clock(&mut self) {
        let next: Vec<u64> = self.dffs.iter().map(|&id| self.values[self.nl.gate(id).inputs()[0].index()]).collect();
        for (&id, v) in self.dffs.iter().zip(next) {
            self.values[self.nl.gate(id).output.index()] = v;
        }
    }

    pub fn lanes(&self, net: NetId) -> u64 {
        self.values[net.index()]
    }

    /// Value of `nets` (LSB first) in `lane`, zero-extended.
    pub fn read_unsigned(&self, nets: &[NetId], lane: usize) -> u64 {
        nets.iter().enumerate().fold(0, |acc, (b, n)| acc | (((self.values[n.index()] >> lane) & 1) << b))
    }

    /// Value of `nets` in `lane` as two's complement.
    pub fn read_signed(&self, nets: &[NetId], lane: usize) -> i64 {
        let raw = self.read_unsigned(nets, lane);
        let w = nets.len();
        if w == 0 || w >= 64 {
            return raw as i64;
        }
        ((raw << (64 - w)) as i64) >> (64 - w)
    }

    fn probe_signed(&self, name: &str, lane: usize) -> i64 {
        self.nl.probe(name).map_or(0, |p| self.read_signed(p, lane))
    }

    fn probe_unsigned(&self, name: &str, lane: usize) -> u64 {
        self.nl.probe(name).map_or(0, |p| self.read_unsigned(p, lane))
    }

    fn record(&self, cycle: usize, lane: usize) -> CycleRecord {
        let row = self
            .nl
            .probe("row")
            .map_or_else(Vec::new, |p| p.iter().map(|n| (self.values[n.index()] >> lane) & 1 == 1).collect());
        CycleRecord {
            cycle,
            counter: self.probe_unsigned("counter", lane),
            row,
            accumulator: self.probe_signed("acc", lane),
            score: self.probe_signed("score", lane),
            class_id: self.output_unsigned("class_id", lane),
            done: self.output_unsigned("done", lane) == 1,
        }
    }

    fn output_unsigned(&self, name: &str, lane: usize) -> u64 {
        self.nl.output(name).map_or(0, |p| self.read_unsigned(&p.nets, lane))
    }

    fn done_lanes(&self) -> u64 {
        self.nl.output("done").map_or(u64::MAX, |p| self.values[p.nets[0].index()])
    }
}

/// State observed during one cycle, after combinational settling and before
/// the closing clock edge.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleRecord {
    pub cycle: usize,
    pub counter: u64,
    pub row: Vec<bool>,
    pub accumulator: i64,
    pub score: i64,
    pub class_id: u64,
    pub done: bool,
}

/// Cycles from reset release up to and including the first cycle with done high.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimTrace {
    pub cycles: Vec<CycleRecord>,
}

impl SimTrace {
    /// Records of the cycles before done, i.e. the working cycles.
    pub fn working(&self) -> &[CycleRecord] {
        let end = self.cycles.iter().position(|c| c.done).unwrap_or(self.cycles.len());
        &self.cycles[..end]
    }
}

/// Cycle index at which done is first observed high.
pub fn measured_latency_cycles(trace: &SimTrace) -> usize {
    trace.working().len()
}

/// Runs one input from reset until done; returns the class and the trace.
pub fn simulate(nl: &Netlist, x_raw: &[i64], max_cycles: usize) -> Result<(usize, SimTrace)> {
    let mut sim = Simulator::new(nl)?;
    sim.set_features(&[x_raw])?;
    let mut cycles = Vec::new();
    for cycle in 0..=max_cycles {
        sim.settle();
        let rec = sim.record(cycle, 0);
        let done = rec.done;
        let class = rec.class_id as usize;
        cycles.push(rec);
        if done {
            return Ok((class, SimTrace { cycles }));
        }
        sim.clock();
    }
    Err(Error::SimulationTimeout(max_cycles))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub sample: usize,
    /// Working cycle whose accumulator disagreed, or `None` for a class mismatch.
    pub cycle: Option<usize>,
    pub width: u32,
    pub expected: i64,
    pub observed: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub samples: usize,
    pub class_mismatches: usize,
    pub accumulator_checks: usize,
    pub accumulator_matches: usize,
    pub latency_cycles: Vec<usize>,
    pub first_counterexample: Option<Counterexample>,
}

impl EquivalenceReport {
    pub fn accumulator_agreement(&self) -> f64 {
        if self.accumulator_checks == 0 {
            1.0
        } else {
            self.accumulator_matches as f64 / self.accumulator_checks as f64
        }
    }

    pub fn passed(&self) -> bool {
        self.class_mismatches == 0 && self.accumulator_matches == self.accumulator_checks
    }
}

/// Differential check of `nl` against the integer golden model of `q` on every
/// sample of `data` (already normalized; inputs are quantized here).
///
/// The per-cycle accumulator is compared only when the design exposes an
/// `acc` probe, which the sequential design does.
pub fn equivalence_check(q: &QuantizedSvm, nl: &Netlist, data: &Dataset) -> Result<EquivalenceReport> {
    check_dim(q.m, data.m())?;
    let mut sim = Simulator::new(nl)?;
    let has_acc = nl.probe("acc").is_some();
    let max_cycles = q.n + 2;
    let mut report = EquivalenceReport {
        samples: data.len(),
        class_mismatches: 0,
        accumulator_checks: 0,
        accumulator_matches: 0,
        latency_cycles: Vec::new(),
        first_counterexample: None,
    };
    let inputs: Vec<Vec<i64>> = data.samples().iter().map(|s| q.quantize_input(&s.features)).collect();
    for (chunk_no, chunk) in inputs.chunks(LANES).enumerate() {
        let base = chunk_no * LANES;
        let golden: Vec<Vec<i64>> = chunk.iter().map(|x| q.scores(x)).collect::<Result<_>>()?;
        let lanes: Vec<&[i64]> = chunk.iter().map(Vec::as_slice).collect();
        let live = if chunk.len() == LANES { u64::MAX } else { (1u64 << chunk.len()) - 1 };
        sim.reset();
        sim.set_features(&lanes)?;
        let mut finished = 0u64;
        let mut latency = alloc::vec![0usize; chunk.len()];
        for cycle in 0..=max_cycles {
            sim.settle();
            let done = sim.done_lanes() & live;
            for lane in 0..chunk.len() {
                let bit = 1u64 << lane;
                if finished & bit != 0 {
                    continue;
                }
                if done & bit != 0 {
                    finished |= bit;
                    latency[lane] = cycle;
                    let expected = argmax_first(&golden[lane]);
                    let observed = sim.output_unsigned("class_id", lane) as usize;
                    if expected != observed {
                        report.class_mismatches += 1;
                        report.first_counterexample.get_or_insert(Counterexample {
                            sample: base + lane,
                            cycle: None,
                            width: nl.info.counter_width,
                            expected: expected as i64,
                            observed: observed as i64,
                        });
                    }
                } else if has_acc {
                    report.accumulator_checks += 1;
                    let observed = sim.probe_signed("acc", lane);
                    let expected = golden[lane].get(cycle).copied();
                    if expected == Some(observed) {
                        report.accumulator_matches += 1;
                    } else {
                        report.first_counterexample.get_or_insert(Counterexample {
                            sample: base + lane,
                            cycle: Some(cycle),
                            width: nl.info.accumulator_width,
                            expected: expected.unwrap_or(0),
                            observed,
                        });
                    }
                }
            }
            if finished == live {
                break;
            }
            sim.clock();
        }
        if finished != live {
            return Err(Error::SimulationTimeout(max_cycles));
        }
        report.latency_cycles.extend(latency);
    }
    Ok(report)
}
