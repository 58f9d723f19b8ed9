// SPDX-License-Identifier: Apache-2.0

//! Structural Verilog-2001 output and a reader for exactly that subset.
//!
//! Nets are named `<block>_n<id>` after the block of their driving gate, and
//! primary-input bits `pi_n<id>`, so the numbering survives a round trip.
//! Design parameters, blocks, components and probes travel in `// @` header
//! comments. Combinational gates are Verilog primitives, MUX2 is a conditional
//! `assign`, and every DFF is a `reg` with a synchronous reset in its own
//! `always` block.
//!
//! ```text
//! and g12 (engine_n40, pi_n3, storage_n17);
//! assign storage_n18 = control_n9 ? 1'b1 : storage_n17;
//! always @(posedge clk) voter_n51 <= rst ? 1'b1 : voter_n50;
//! ```

use std::collections::BTreeMap;
use std::fmt::Write;

use seqsvm_core::netlist::{
    BlockId, Component, ComponentKind, DesignInfo, DesignKind, Driver, Gate, GateKind, NetId, Netlist, Port,
};

use crate::{Error, Result};

const INPUT_PREFIX: &str = "pi";

fn net_name(nl: &Netlist, n: NetId) -> String {
    match nl.driver(n) {
        Driver::Const(false) => "1'b0".into(),
        Driver::Const(true) => "1'b1".into(),
        Driver::Input { .. } => format!("{INPUT_PREFIX}_n{}", n.0),
        Driver::Gate(g) => format!("{}_n{}", nl.block_name(nl.gate(g).block), n.0),
    }
}

fn primitive(kind: GateKind) -> Option<&'static str> {
    Some(match kind {
        GateKind::And2 => "and",
        GateKind::Or2 => "or",
        GateKind::Nand2 => "nand",
        GateKind::Nor2 => "nor",
        GateKind::Xor2 => "xor",
        GateKind::Not => "not",
        GateKind::Mux2 | GateKind::Dff => return None,
    })
}

fn from_primitive(word: &str) -> Option<GateKind> {
    [GateKind::And2, GateKind::Or2, GateKind::Nand2, GateKind::Nor2, GateKind::Xor2, GateKind::Not]
        .into_iter()
        .find(|&k| primitive(k) == Some(word))
}

/// Renders `nl`. `meta` lines (e.g. a model hash or formats) go into the header.
pub fn emit_hdl(nl: &Netlist, meta: &[(String, String)]) -> String {
    let mut out = String::new();
    let info = nl.info;
    let w = &mut out;
    let _ = writeln!(w, "// structural netlist, one primitive per line");
    let _ = writeln!(
        w,
        "// @design {} kind={} m={} n={} input_width={} weight_width={} bias_width={} accumulator_width={} counter_width={}",
        nl.name,
        info.kind.name(),
        info.m,
        info.n,
        info.input_width,
        info.weight_width,
        info.bias_width,
        info.accumulator_width,
        info.counter_width
    );
    for (k, v) in meta {
        let _ = writeln!(w, "// @meta {k}={v}");
    }
    let _ = writeln!(w, "// @blocks {}", nl.blocks().join(" "));
    for c in nl.components() {
        let _ = writeln!(w, "// @component {} {} {}", c.kind.name(), nl.block_name(c.block), c.width);
    }
    for (name, nets) in nl.probes() {
        let names: Vec<String> = nets.iter().map(|&n| net_name(nl, n)).collect();
        let _ = writeln!(w, "// @probe {name} {}", names.join(" "));
    }

    let mut ports = vec!["clk".to_string(), "rst".to_string()];
    ports.extend(nl.inputs().iter().map(|p| p.name.clone()));
    ports.extend(nl.outputs().iter().map(|p| p.name.clone()));
    let _ = writeln!(w, "module {} ({});", nl.name, ports.join(", "));
    let _ = writeln!(w, "  input clk;");
    let _ = writeln!(w, "  input rst;");
    for p in nl.inputs() {
        let _ = writeln!(w, "  input [{}:0] {};", p.nets.len().max(1) - 1, p.name);
    }
    for p in nl.outputs() {
        let _ = writeln!(w, "  output [{}:0] {};", p.nets.len().max(1) - 1, p.name);
    }
    for p in nl.inputs() {
        for &n in &p.nets {
            let _ = writeln!(w, "  wire {};", net_name(nl, n));
        }
    }
    for g in nl.gates() {
        let kw = if g.kind == GateKind::Dff { "reg" } else { "wire" };
        let _ = writeln!(w, "  {kw} {};", net_name(nl, g.output));
    }
    for p in nl.inputs() {
        for (i, &n) in p.nets.iter().enumerate() {
            let _ = writeln!(w, "  assign {} = {}[{i}];", net_name(nl, n), p.name);
        }
    }
    for (i, g) in nl.gates().iter().enumerate() {
        let o = net_name(nl, g.output);
        let ins: Vec<String> = g.inputs().iter().map(|&n| net_name(nl, n)).collect();
        let _ = match g.kind {
            GateKind::Mux2 => writeln!(w, "  assign {o} = {} ? {} : {};", ins[0], ins[2], ins[1]),
            GateKind::Dff => writeln!(w, "  always @(posedge clk) {o} <= rst ? 1'b{} : {};", g.init as u8, ins[0]),
            k => writeln!(w, "  {} g{i} ({o}, {});", primitive(k).unwrap(), ins.join(", ")),
        };
    }
    for p in nl.outputs() {
        for (i, &n) in p.nets.iter().enumerate() {
            let _ = writeln!(w, "  assign {}[{i}] = {};", p.name, net_name(nl, n));
        }
    }
    let _ = writeln!(w, "endmodule");
    out
}

struct Parser {
    line: usize,
}

impl Parser {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Hdl { line: self.line, msg: msg.into() })
    }

    fn net(&self, tok: &str) -> Result<NetId> {
        match tok {
            "1'b0" => return Ok(NetId::ZERO),
            "1'b1" => return Ok(NetId::ONE),
            _ => {}
        }
        match tok.rsplit_once("_n").and_then(|(_, id)| id.parse::<u32>().ok()) {
            Some(id) => Ok(NetId(id)),
            None => self.err(format!("bad net name '{tok}'")),
        }
    }

    fn block_of(&self, tok: &str, blocks: &[String]) -> Result<BlockId> {
        let prefix = tok.rsplit_once("_n").map(|(b, _)| b).unwrap_or("");
        match blocks.iter().position(|b| b == prefix) {
            Some(i) => Ok(BlockId(i as u16)),
            None => self.err(format!("net '{tok}' names no declared block")),
        }
    }

    /// `name[idx]`
    fn indexed<'a>(&self, tok: &'a str) -> Result<(&'a str, usize)> {
        let parsed =
            tok.strip_suffix(']').and_then(|t| t.split_once('[')).and_then(|(n, i)| i.parse().ok().map(|i| (n, i)));
        match parsed {
            Some(p) => Ok(p),
            None => self.err(format!("expected name[index], got '{tok}'")),
        }
    }

    fn kv<'a>(&self, fields: &'a str) -> BTreeMap<&'a str, &'a str> {
        fields.split_whitespace().filter_map(|f| f.split_once('=')).collect()
    }
}

/// Reads text produced by [`emit_hdl`] back into an identical netlist.
pub fn parse_hdl(text: &str) -> Result<Netlist> {
    let mut p = Parser { line: 0 };
    let mut name = None;
    let mut info = None;
    let mut blocks: Vec<String> = Vec::new();
    let mut component_lines: Vec<(usize, String, String, u32)> = Vec::new();
    let mut probe_lines: Vec<(usize, String, Vec<String>)> = Vec::new();
    let mut inputs: Vec<(String, usize)> = Vec::new();
    let mut outputs: Vec<(String, usize)> = Vec::new();
    let mut input_bits: BTreeMap<(String, usize), NetId> = BTreeMap::new();
    let mut output_bits: BTreeMap<(String, usize), NetId> = BTreeMap::new();
    let mut gates: Vec<Gate> = Vec::new();
    let mut max_net = 1u32;
    let mut ended = false;

    for (i, raw) in text.lines().enumerate() {
        p.line = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("// @") {
            let (tag, body) = rest.split_once(' ').unwrap_or((rest, ""));
            match tag {
                "design" => {
                    let (n, fields) = body.split_once(' ').unwrap_or((body, ""));
                    name = Some(n.to_string());
                    let kv = p.kv(fields);
                    let num = |k: &str| -> Result<usize> {
                        match kv.get(k).and_then(|v| v.parse().ok()) {
                            Some(v) => Ok(v),
                            None => p.err(format!("design header lacks {k}")),
                        }
                    };
                    let kind = match kv.get("kind").and_then(|k| DesignKind::from_name(k)) {
                        Some(k) => k,
                        None => return p.err("design header lacks a known kind"),
                    };
                    info = Some(DesignInfo {
                        kind,
                        m: num("m")?,
                        n: num("n")?,
                        input_width: num("input_width")? as u32,
                        weight_width: num("weight_width")? as u32,
                        bias_width: num("bias_width")? as u32,
                        accumulator_width: num("accumulator_width")? as u32,
                        counter_width: num("counter_width")? as u32,
                    });
                }
                "blocks" => blocks = body.split_whitespace().map(String::from).collect(),
                "component" => {
                    let f: Vec<&str> = body.split_whitespace().collect();
                    match f.as_slice() {
                        [k, b, w] => match w.parse() {
                            Ok(w) => component_lines.push((p.line, k.to_string(), b.to_string(), w)),
                            Err(_) => return p.err("bad component width"),
                        },
                        _ => return p.err("component needs kind, block and width"),
                    }
                }
                "probe" => {
                    let mut f = body.split_whitespace();
                    let n = f.next().unwrap_or_default().to_string();
                    probe_lines.push((p.line, n, f.map(String::from).collect()));
                }
                "meta" => {}
                other => return p.err(format!("unknown header tag '{other}'")),
            }
            continue;
        }
        if line.starts_with("//") {
            continue;
        }
        let stmt = match line.strip_suffix(';') {
            Some(s) => s.trim(),
            None if line == "endmodule" => {
                ended = true;
                continue;
            }
            None => return p.err("statement does not end with ';'"),
        };
        let (head, rest) = stmt.split_once(' ').unwrap_or((stmt, ""));
        match head {
            "module" => {
                let m = rest.split('(').next().unwrap_or("").trim();
                if name.as_deref() != Some(m) {
                    return p.err("module name does not match the design header");
                }
            }
            "input" | "output" => {
                let (width, pname) = match rest.strip_prefix('[') {
                    Some(r) => {
                        let (range, n) = match r.split_once(']') {
                            Some(x) => x,
                            None => return p.err("unterminated range"),
                        };
                        let msb: usize = match range.split(':').next().and_then(|v| v.trim().parse().ok()) {
                            Some(v) => v,
                            None => return p.err("bad range"),
                        };
                        (msb + 1, n.trim())
                    }
                    None => (1, rest.trim()),
                };
                if head == "input" && (pname == "clk" || pname == "rst") {
                    continue;
                }
                let list = if head == "input" { &mut inputs } else { &mut outputs };
                list.push((pname.to_string(), width));
            }
            "wire" | "reg" => {}
            "assign" => {
                let (lhs, rhs) = match rest.split_once('=') {
                    Some((l, r)) => (l.trim(), r.trim()),
                    None => return p.err("assign without '='"),
                };
                if let Some((sel, arms)) = rhs.split_once('?') {
                    let (b, a) = match arms.split_once(':') {
                        Some(x) => x,
                        None => return p.err("conditional without ':'"),
                    };
                    let out = p.net(lhs)?;
                    let ins = [p.net(sel.trim())?, p.net(a.trim())?, p.net(b.trim())?];
                    let block = p.block_of(lhs, &blocks)?;
                    max_net = max_net.max(out.0);
                    gates.push(Gate::new(GateKind::Mux2, &ins, out, block, false));
                } else if lhs.contains('[') {
                    let (port, bit) = p.indexed(lhs)?;
                    output_bits.insert((port.to_string(), bit), p.net(rhs)?);
                } else if rhs.contains('[') {
                    let (port, bit) = p.indexed(rhs)?;
                    let net = p.net(lhs)?;
                    max_net = max_net.max(net.0);
                    input_bits.insert((port.to_string(), bit), net);
                } else {
                    return p.err("unsupported assign form");
                }
            }
            "always" => {
                let body = match rest.strip_prefix("@(posedge clk)") {
                    Some(b) => b.trim(),
                    None => return p.err("only '@(posedge clk)' blocks are supported"),
                };
                let (q, rhs) = match body.split_once("<=") {
                    Some((q, r)) => (q.trim(), r.trim()),
                    None => return p.err("always block without '<='"),
                };
                let (init, d) = match rhs.strip_prefix("rst ?").and_then(|r| r.split_once(':')) {
                    Some((i, d)) => (i.trim(), d.trim()),
                    None => return p.err("DFF must reset through 'rst ? v : d'"),
                };
                let init = match init {
                    "1'b0" => false,
                    "1'b1" => true,
                    _ => return p.err("reset value must be 1'b0 or 1'b1"),
                };
                let out = p.net(q)?;
                let block = p.block_of(q, &blocks)?;
                max_net = max_net.max(out.0);
                gates.push(Gate::new(GateKind::Dff, &[p.net(d)?], out, block, init));
            }
            word => {
                let kind = match from_primitive(word) {
                    Some(k) => k,
                    None => return p.err(format!("unknown statement '{word}'")),
                };
                let pins = match rest.split_once('(').and_then(|(_, r)| r.strip_suffix(')')) {
                    Some(pins) => pins,
                    None => return p.err("primitive without a pin list"),
                };
                let toks: Vec<&str> = pins.split(',').map(str::trim).collect();
                if toks.len() != kind.arity() + 1 {
                    return p.err(format!("{kind} takes {} pins", kind.arity() + 1));
                }
                let out = p.net(toks[0])?;
                let ins = toks[1..].iter().map(|t| p.net(t)).collect::<Result<Vec<_>>>()?;
                let block = p.block_of(toks[0], &blocks)?;
                max_net = max_net.max(out.0);
                gates.push(Gate::new(kind, &ins, out, block, false));
            }
        }
    }
    p.line = text.lines().count();
    if !ended {
        return p.err("missing endmodule");
    }
    let (name, info) = match (name, info) {
        (Some(n), Some(i)) => (n, i),
        _ => return p.err("missing design header"),
    };
    let collect_port = |(pname, width): &(String, usize), bits: &BTreeMap<(String, usize), NetId>| {
        (0..*width)
            .map(|b| bits.get(&(pname.clone(), b)).copied())
            .collect::<Option<Vec<_>>>()
            .map(|nets| Port { name: pname.clone(), nets })
            .ok_or_else(|| Error::Hdl { line: 0, msg: format!("port {pname} has unassigned bits") })
    };
    let inputs = inputs.iter().map(|x| collect_port(x, &input_bits)).collect::<Result<Vec<_>>>()?;
    let outputs = outputs.iter().map(|x| collect_port(x, &output_bits)).collect::<Result<Vec<_>>>()?;
    let mut components = Vec::new();
    for (line, k, b, width) in component_lines {
        p.line = line;
        let kind = match ComponentKind::from_name(&k) {
            Some(k) => k,
            None => return p.err(format!("unknown component '{k}'")),
        };
        let block = match blocks.iter().position(|x| *x == b) {
            Some(i) => BlockId(i as u16),
            None => return p.err(format!("component in undeclared block '{b}'")),
        };
        components.push(Component { kind, block, width });
    }
    let mut probes = BTreeMap::new();
    for (line, pname, toks) in probe_lines {
        p.line = line;
        let nets = toks.iter().map(|t| p.net(t)).collect::<Result<Vec<_>>>()?;
        probes.insert(pname, nets);
    }
    Ok(Netlist::from_parts(name, info, max_net as usize + 1, blocks, gates, inputs, outputs, components, probes)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use seqsvm_core::netlist::DesignKind;

    fn info() -> DesignInfo {
        DesignInfo {
            kind: DesignKind::ParallelOvr,
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
    fn single_not_gate() {
        let mut nl = Netlist::new("inv", info());
        let x = nl.add_input("x", 1);
        let y = nl.scope("logic").not(x[0]);
        nl.add_output("y", vec![y]);
        let text = emit_hdl(&nl, &[]);
        let prims: Vec<&str> = text.lines().filter(|l| l.trim_start().starts_with("not ")).collect();
        assert_eq!(prims, vec!["  not g0 (logic_n3, pi_n2);"]);
        assert_eq!(parse_hdl(&text).unwrap(), nl);
    }

    #[test]
    fn dff_and_mux_round_trip() {
        let mut nl = Netlist::new("reg", info());
        let x = nl.add_input("x", 2);
        let mut s = nl.scope("r");
        let (ff, q) = s.dff(true);
        let d = s.mux2(x[0], q, x[1]);
        s.connect(ff, d);
        nl.add_output("q", vec![q, NetId::ONE]);
        nl.set_probe("state", vec![q, NetId::ZERO]);
        let text = emit_hdl(&nl, &[("hash".into(), "abc".into())]);
        assert!(text.contains("always @(posedge clk) r_n4 <= rst ? 1'b1 : r_n5;"));
        assert_eq!(parse_hdl(&text).unwrap(), nl);
    }

    #[test]
    fn malformed_text_reports_a_line() {
        let mut nl = Netlist::new("inv", info());
        let x = nl.add_input("x", 1);
        let y = nl.scope("logic").not(x[0]);
        nl.add_output("y", vec![y]);
        let text = emit_hdl(&nl, &[]).replace("not g0", "frob g0");
        match parse_hdl(&text) {
            Err(Error::Hdl { line, .. }) => assert!(line > 1),
            other => panic!("{other:?}"),
        }
        let cut: String = emit_hdl(&nl, &[]).replace("endmodule", "");
        assert!(parse_hdl(&cut).is_err());
    }
}
