// SPDX-License-Identifier: Apache-2.0

//! Flat gate-level netlist with named hierarchical blocks.
//!
//! Every net has exactly one driver: a constant, a bit of an input port, or the
//! output of one gate. Nets 0 and 1 are the constant 0 and 1 ties. DFFs share
//! one implicit clock and a synchronous reset that loads each DFF's `init` bit.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NetId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GateId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BlockId(pub u16);

impl NetId {
    pub const ZERO: NetId = NetId(0);
    pub const ONE: NetId = NetId(1);

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl GateId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum GateKind {
    And2,
    Or2,
    Nand2,
    Nor2,
    Not,
    Xor2,
    Mux2,
    Dff,
}

impl GateKind {
    pub const ALL: [GateKind; 8] = [
        GateKind::And2,
        GateKind::Or2,
        GateKind::Nand2,
        GateKind::Nor2,
        GateKind::Not,
        GateKind::Xor2,
        GateKind::Mux2,
        GateKind::Dff,
    ];

    pub fn arity(self) -> usize {
        match self {
            GateKind::Not | GateKind::Dff => 1,
            GateKind::Mux2 => 3,
            _ => 2,
        }
    }

    pub fn is_sequential(self) -> bool {
        self == GateKind::Dff
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::And2 => "AND2",
            GateKind::Or2 => "OR2",
            GateKind::Nand2 => "NAND2",
            GateKind::Nor2 => "NOR2",
            GateKind::Not => "NOT",
            GateKind::Xor2 => "XOR2",
            GateKind::Mux2 => "MUX2",
            GateKind::Dff => "DFF",
        }
    }

    pub fn from_name(s: &str) -> Option<GateKind> {
        GateKind::ALL.into_iter().find(|k| k.name() == s)
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Driver {
    Const(bool),
    Input { port: u32, bit: u32 },
    Gate(GateId),
}

/// One primitive. `Mux2` inputs are `[sel, a, b]` and compute `sel ? b : a`;
/// `Dff` has a single `d` input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Gate {
    pub kind: GateKind,
    inputs: [NetId; 3],
    pub output: NetId,
    pub block: BlockId,
    pub init: bool,
}

impl Gate {
    pub fn new(kind: GateKind, ins: &[NetId], output: NetId, block: BlockId, init: bool) -> Self {
        assert_eq!(ins.len(), kind.arity(), "{kind} takes {} inputs", kind.arity());
        let mut inputs = [NetId::ZERO; 3];
        inputs[..ins.len()].copy_from_slice(ins);
        Gate { kind, inputs, output, block, init }
    }

    pub fn inputs(&self) -> &[NetId] {
        &self.inputs[..self.kind.arity()]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Port {
    pub name: String,
    pub nets: Vec<NetId>,
}

/// Register-transfer-level unit a group of gates implements. Kept so counts
/// like "multipliers in the engine" need not be reverse-engineered from gates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ComponentKind {
    Counter,
    MuxStorage,
    Multiplier,
    Adder,
    Comparator,
    Register,
    WeightedSum,
}

impl ComponentKind {
    pub const ALL: [ComponentKind; 7] = [
        ComponentKind::Counter,
        ComponentKind::MuxStorage,
        ComponentKind::Multiplier,
        ComponentKind::Adder,
        ComponentKind::Comparator,
        ComponentKind::Register,
        ComponentKind::WeightedSum,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ComponentKind::Counter => "counter",
            ComponentKind::MuxStorage => "mux_storage",
            ComponentKind::Multiplier => "multiplier",
            ComponentKind::Adder => "adder",
            ComponentKind::Comparator => "comparator",
            ComponentKind::Register => "register",
            ComponentKind::WeightedSum => "weighted_sum",
        }
    }

    pub fn from_name(s: &str) -> Option<ComponentKind> {
        ComponentKind::ALL.into_iter().find(|k| k.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Component {
    pub kind: ComponentKind,
    pub block: BlockId,
    pub width: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DesignKind {
    Sequential,
    ParallelOvr,
    ParallelOvoShape,
}

impl DesignKind {
    pub fn name(self) -> &'static str {
        match self {
            DesignKind::Sequential => "sequential",
            DesignKind::ParallelOvr => "parallel_ovr",
            DesignKind::ParallelOvoShape => "parallel_ovo_shape",
        }
    }

    pub fn from_name(s: &str) -> Option<DesignKind> {
        [DesignKind::Sequential, DesignKind::ParallelOvr, DesignKind::ParallelOvoShape]
            .into_iter()
            .find(|k| k.name() == s)
    }
}

/// Parameters a design was generated from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DesignInfo {
    pub kind: DesignKind,
    pub m: usize,
    pub n: usize,
    pub input_width: u32,
    pub weight_width: u32,
    pub bias_width: u32,
    pub accumulator_width: u32,
    pub counter_width: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Netlist {
    pub name: String,
    pub info: DesignInfo,
    blocks: Vec<String>,
    drivers: Vec<Driver>,
    gates: Vec<Gate>,
    inputs: Vec<Port>,
    outputs: Vec<Port>,
    components: Vec<Component>,
    probes: BTreeMap<String, Vec<NetId>>,
}

impl Netlist {
    pub fn new(name: impl Into<String>, info: DesignInfo) -> Self {
        Netlist {
            name: name.into(),
            info,
            blocks: Vec::new(),
            drivers: alloc::vec![Driver::Const(false), Driver::Const(true)],
            gates: Vec::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            components: Vec::new(),
            probes: BTreeMap::new(),
        }
    }

    /// Reassembles a netlist from its parts (e.g. after parsing HDL text).
    /// Net drivers are derived from the ports and gates; the result is validated.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        name: String,
        info: DesignInfo,
        net_count: usize,
        blocks: Vec<String>,
        gates: Vec<Gate>,
        inputs: Vec<Port>,
        outputs: Vec<Port>,
        components: Vec<Component>,
        probes: BTreeMap<String, Vec<NetId>>,
    ) -> Result<Self> {
        if net_count < 2 {
            return Err(Error::Structure(String::from("missing constant nets")));
        }
        let mut drivers: Vec<Option<Driver>> = alloc::vec![None; net_count];
        drivers[0] = Some(Driver::Const(false));
        drivers[1] = Some(Driver::Const(true));
        let mut claim = |net: NetId, d: Driver| -> Result<()> {
            match drivers.get_mut(net.index()) {
                Some(slot @ None) => {
                    *slot = Some(d);
                    Ok(())
                }
                Some(Some(_)) => Err(Error::Structure(alloc::format!("net {} has more than one driver", net.0))),
                None => Err(Error::Structure(alloc::format!("net {} out of range", net.0))),
            }
        };
        for (p, port) in inputs.iter().enumerate() {
            for (b, &net) in port.nets.iter().enumerate() {
                claim(net, Driver::Input { port: p as u32, bit: b as u32 })?;
            }
        }
        for (i, g) in gates.iter().enumerate() {
            claim(g.output, Driver::Gate(GateId(i as u32)))?;
        }
        let drivers = drivers
            .into_iter()
            .enumerate()
            .map(|(i, d)| d.ok_or_else(|| Error::Structure(alloc::format!("net {i} has no driver"))))
            .collect::<Result<Vec<_>>>()?;
        let nl = Netlist { name, info, blocks, drivers, gates, inputs, outputs, components, probes };
        nl.validate()?;
        Ok(nl)
    }

    /// Returns the id of block `name`, creating it on first use.
    pub fn block(&mut self, name: &str) -> BlockId {
        if let Some(i) = self.blocks.iter().position(|b| b == name) {
            return BlockId(i as u16);
        }
        self.blocks.push(String::from(name));
        BlockId((self.blocks.len() - 1) as u16)
    }

    pub fn blocks(&self) -> &[String] {
        &self.blocks
    }

    pub fn block_name(&self, b: BlockId) -> &str {
        &self.blocks[b.0 as usize]
    }

    pub fn add_input(&mut self, name: impl Into<String>, width: usize) -> Vec<NetId> {
        let port = self.inputs.len() as u32;
        let nets: Vec<NetId> = (0..width as u32).map(|bit| self.new_net(Driver::Input { port, bit })).collect();
        self.inputs.push(Port { name: name.into(), nets: nets.clone() });
        nets
    }

    pub fn add_output(&mut self, name: impl Into<String>, nets: Vec<NetId>) {
        self.outputs.push(Port { name: name.into(), nets });
    }

    fn new_net(&mut self, driver: Driver) -> NetId {
        self.drivers.push(driver);
        NetId((self.drivers.len() - 1) as u32)
    }

    pub fn add_gate(&mut self, kind: GateKind, block: BlockId, inputs: &[NetId]) -> NetId {
        self.add_gate_full(kind, block, inputs, false).1
    }

    fn add_gate_full(&mut self, kind: GateKind, block: BlockId, ins: &[NetId], init: bool) -> (GateId, NetId) {
        assert_eq!(ins.len(), kind.arity(), "{kind} takes {} inputs", kind.arity());
        let id = GateId(self.gates.len() as u32);
        let output = self.new_net(Driver::Gate(id));
        let mut inputs = [NetId::ZERO; 3];
        inputs[..ins.len()].copy_from_slice(ins);
        self.gates.push(Gate { kind, inputs, output, block, init });
        (id, output)
    }

    /// Adds a DFF whose `d` input is connected later with [`Netlist::connect_dff`].
    pub fn add_dff(&mut self, block: BlockId, init: bool) -> (GateId, NetId) {
        self.add_gate_full(GateKind::Dff, block, &[NetId::ZERO], init)
    }

    pub fn connect_dff(&mut self, dff: GateId, d: NetId) {
        let g = &mut self.gates[dff.index()];
        assert_eq!(g.kind, GateKind::Dff);
        g.inputs[0] = d;
    }

    pub fn add_component(&mut self, kind: ComponentKind, block: BlockId, width: u32) {
        self.components.push(Component { kind, block, width });
    }

    pub fn set_probe(&mut self, name: impl Into<String>, nets: Vec<NetId>) {
        self.probes.insert(name.into(), nets);
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn gate(&self, g: GateId) -> &Gate {
        &self.gates[g.index()]
    }

    pub fn net_count(&self) -> usize {
        self.drivers.len()
    }

    pub fn driver(&self, n: NetId) -> Driver {
        self.drivers[n.index()]
    }

    pub fn inputs(&self) -> &[Port] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[Port] {
        &self.outputs
    }

    pub fn input(&self, name: &str) -> Option<&Port> {
        self.inputs.iter().find(|p| p.name == name)
    }

    pub fn output(&self, name: &str) -> Option<&Port> {
        self.outputs.iter().find(|p| p.name == name)
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn count_components(&self, kind: ComponentKind, block: Option<&str>) -> usize {
        self.components.iter().filter(|c| c.kind == kind && block.is_none_or(|b| self.block_name(c.block) == b)).count()
    }

    pub fn probes(&self) -> &BTreeMap<String, Vec<NetId>> {
        &self.probes
    }

    pub fn probe(&self, name: &str) -> Option<&[NetId]> {
        self.probes.get(name).map(Vec::as_slice)
    }

    pub fn dffs(&self) -> impl Iterator<Item = (GateId, &Gate)> {
        self.gates.iter().enumerate().filter(|(_, g)| g.kind.is_sequential()).map(|(i, g)| (GateId(i as u32), g))
    }

    pub fn is_sequential(&self) -> bool {
        self.gates.iter().any(|g| g.kind.is_sequential())
    }

    /// Combinational gates in topological order. Fails on a combinational cycle.
    pub fn comb_order(&self) -> Result<Vec<GateId>> {
        let n_nets = self.drivers.len();
        // fanout[net] = combinational gates reading the net
        let mut fanout: Vec<Vec<u32>> = alloc::vec![Vec::new(); n_nets];
        let mut pending: Vec<u32> = alloc::vec![0; self.gates.len()];
        let mut ready = Vec::new();
        for (i, g) in self.gates.iter().enumerate() {
            if g.kind.is_sequential() {
                continue;
            }
            for &inp in g.inputs() {
                if let Driver::Gate(src) = self.drivers[inp.index()] {
                    if !self.gates[src.index()].kind.is_sequential() {
                        fanout[inp.index()].push(i as u32);
                        pending[i] += 1;
                    }
                }
            }
            if pending[i] == 0 {
                ready.push(i as u32);
            }
        }
        let mut order = Vec::with_capacity(self.gates.len());
        while let Some(i) = ready.pop() {
            order.push(GateId(i));
            for &j in &fanout[self.gates[i as usize].output.index()] {
                pending[j as usize] -= 1;
                if pending[j as usize] == 0 {
                    ready.push(j);
                }
            }
        }
        let comb = self.gates.iter().filter(|g| !g.kind.is_sequential()).count();
        if order.len() != comb {
            return Err(Error::Structure(alloc::format!("combinational cycle through {} gates", comb - order.len())));
        }
        Ok(order)
    }

    /// Checks the one-driver rule, reference validity, and acyclicity.
    pub fn validate(&self) -> Result<()> {
        let n_nets = self.drivers.len() as u32;
        let structure = |m: String| Err(Error::Structure(m));
        if self.drivers.first() != Some(&Driver::Const(false)) || self.drivers.get(1) != Some(&Driver::Const(true)) {
            return structure(String::from("nets 0 and 1 must be the constant ties"));
        }
        for (i, g) in self.gates.iter().enumerate() {
            if g.output.0 >= n_nets || self.drivers[g.output.index()] != Driver::Gate(GateId(i as u32)) {
                return structure(alloc::format!("gate {i} does not drive its output net"));
            }
            if g.inputs().iter().any(|n| n.0 >= n_nets) {
                return structure(alloc::format!("gate {i} reads an undefined net"));
            }
            if g.block.0 as usize >= self.blocks.len() {
                return structure(alloc::format!("gate {i} has no block"));
            }
        }
        for (n, d) in self.drivers.iter().enumerate() {
            match *d {
                Driver::Gate(g) if g.index() >= self.gates.len() || self.gates[g.index()].output.index() != n => {
                    return structure(alloc::format!("net {n} has an inconsistent gate driver"));
                }
                Driver::Input { port, bit } => {
                    let ok = self
                        .inputs
                        .get(port as usize)
                        .and_then(|p| p.nets.get(bit as usize))
                        .is_some_and(|&x| x.index() == n);
                    if !ok {
                        return structure(alloc::format!("net {n} has an inconsistent input driver"));
                    }
                }
                _ => {}
            }
        }
        for p in &self.outputs {
            if p.nets.iter().any(|n| n.0 >= n_nets) {
                return structure(alloc::format!("output {} references an undefined net", p.name));
            }
        }
        for nets in self.probes.values() {
            if nets.iter().any(|n| n.0 >= n_nets) {
                return structure(String::from("probe references an undefined net"));
            }
        }
        self.comb_order().map(|_| ())
    }

    pub fn scope(&mut self, block: &str) -> Scope<'_> {
        let block = self.block(block);
        Scope { nl: self, block }
    }
}

/// Gate constructor bound to one block.
pub struct Scope<'a> {
    pub nl: &'a mut Netlist,
    pub block: BlockId,
}

impl Scope<'_> {
    pub fn and2(&mut self, a: NetId, b: NetId) -> NetId {
        self.nl.add_gate(GateKind::And2, self.block, &[a, b])
    }

    pub fn or2(&mut self, a: NetId, b: NetId) -> NetId {
        self.nl.add_gate(GateKind::Or2, self.block, &[a, b])
    }

    pub fn nand2(&mut self, a: NetId, b: NetId) -> NetId {
        self.nl.add_gate(GateKind::Nand2, self.block, &[a, b])
    }

    pub fn nor2(&mut self, a: NetId, b: NetId) -> NetId {
        self.nl.add_gate(GateKind::Nor2, self.block, &[a, b])
    }

    pub fn xor2(&mut self, a: NetId, b: NetId) -> NetId {
        self.nl.add_gate(GateKind::Xor2, self.block, &[a, b])
    }

    pub fn not(&mut self, a: NetId) -> NetId {
        self.nl.add_gate(GateKind::Not, self.block, &[a])
    }

    /// `sel ? b : a`
    pub fn mux2(&mut self, sel: NetId, a: NetId, b: NetId) -> NetId {
        self.nl.add_gate(GateKind::Mux2, self.block, &[sel, a, b])
    }

    pub fn dff(&mut self, init: bool) -> (GateId, NetId) {
        self.nl.add_dff(self.block, init)
    }

    pub fn connect(&mut self, dff: GateId, d: NetId) {
        self.nl.connect_dff(dff, d);
    }

    pub fn component(&mut self, kind: ComponentKind, width: u32) {
        self.nl.add_component(kind, self.block, width);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn info() -> DesignInfo {
        DesignInfo {
            kind: DesignKind::Sequential,
            m: 1,
            n: 2,
            input_width: 1,
            weight_width: 1,
            bias_width: 1,
            accumulator_width: 1,
            counter_width: 1,
        }
    }

    #[test]
    fn build_and_validate() {
        let mut nl = Netlist::new("t", info());
        let x = nl.add_input("x", 2);
        let mut s = nl.scope("logic");
        let a = s.and2(x[0], x[1]);
        let (ff, q) = s.dff(false);
        let d = s.xor2(a, q);
        s.connect(ff, d);
        nl.add_output("y", alloc::vec![q]);
        nl.validate().unwrap();
        assert_eq!(nl.comb_order().unwrap().len(), 2);
        assert!(nl.is_sequential());
    }

    #[test]
    fn detects_combinational_loop() {
        let mut nl = Netlist::new("loop", info());
        let x = nl.add_input("x", 1);
        let b = nl.block("b");
        let g1 = nl.add_gate(GateKind::And2, b, &[x[0], NetId::ONE]);
        let g2 = nl.add_gate(GateKind::Or2, b, &[g1, x[0]]);
        // Rewire the first gate to read its own downstream net.
        nl.gates[0].inputs[1] = g2;
        assert!(matches!(nl.validate(), Err(Error::Structure(_))));
    }

    #[test]
    fn gate_kind_names_round_trip() {
        for k in GateKind::ALL {
            assert_eq!(GateKind::from_name(k.name()), Some(k));
        }
        for k in ComponentKind::ALL {
            assert_eq!(ComponentKind::from_name(k.name()), Some(k));
        }
    }
}
