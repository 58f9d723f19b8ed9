// SPDX-License-Identifier: Apache-2.0

//! Area, power, frequency, latency and energy under a per-gate technology file.
//!
//! Units: area cm², power mW, delay and latency ms, frequency Hz, energy mJ.
//! Power is a per-gate static proxy, independent of switching activity.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::census::GateCensus;
use crate::error::{invalid, Result};
use crate::netlist::{Driver, GateKind, Netlist};

/// Printed battery budget.
pub const BATTERY_BUDGET_MW: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateCost {
    pub area_cm2: f64,
    pub power_mw: f64,
    pub delay_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TechFile {
    pub name: String,
    pub gates: BTreeMap<GateKind, GateCost>,
}

impl Default for TechFile {
    /// EGFET-inspired defaults, uncalibrated. The DFF delay is its clock-to-q.
    fn default() -> Self {
        let entries = [
            (GateKind::Not, 0.006, 0.010, 2.0),
            (GateKind::Nand2, 0.010, 0.016, 3.0),
            (GateKind::Nor2, 0.010, 0.016, 3.0),
            (GateKind::And2, 0.016, 0.026, 4.5),
            (GateKind::Or2, 0.016, 0.026, 4.5),
            (GateKind::Xor2, 0.030, 0.050, 6.0),
            (GateKind::Mux2, 0.030, 0.050, 6.0),
            (GateKind::Dff, 0.070, 0.120, 8.0),
        ];
        TechFile {
            name: String::from("EGFET-inspired defaults, uncalibrated"),
            gates: entries
                .into_iter()
                .map(|(k, area_cm2, power_mw, delay_ms)| (k, GateCost { area_cm2, power_mw, delay_ms }))
                .collect(),
        }
    }
}

impl TechFile {
    pub fn validate(&self) -> Result<()> {
        for kind in GateKind::ALL {
            let c = self.gates.get(&kind).ok_or_else(|| invalid(alloc::format!("tech file lacks {kind}")))?;
            let ok = [c.area_cm2, c.power_mw, c.delay_ms].iter().all(|v| v.is_finite() && *v > 0.0);
            if !ok {
                return Err(invalid(alloc::format!("tech entry for {kind} must be strictly positive")));
            }
        }
        Ok(())
    }

    pub fn cost(&self, kind: GateKind) -> GateCost {
        self.gates[&kind]
    }

    /// Multiplies every area, power and delay entry by the given factors.
    pub fn scaled(&self, area: f64, power: f64, delay: f64) -> TechFile {
        TechFile {
            name: self.name.clone(),
            gates: self
                .gates
                .iter()
                .map(|(&k, c)| {
                    let g = GateCost {
                        area_cm2: c.area_cm2 * area,
                        power_mw: c.power_mw * power,
                        delay_ms: c.delay_ms * delay,
                    };
                    (k, g)
                })
                .collect(),
        }
    }
}

/// Longest register-to-register (or input-to-output) combinational path in ms.
/// Paths launched by a DFF start at its clock-to-q delay.
pub fn critical_path_ms(nl: &Netlist, tech: &TechFile) -> Result<f64> {
    tech.validate()?;
    let mut arrival = alloc::vec![0.0f64; nl.net_count()];
    for (_, g) in nl.dffs() {
        arrival[g.output.index()] = tech.cost(GateKind::Dff).delay_ms;
    }
    for id in nl.comb_order()? {
        let g = nl.gate(id);
        let t = g.inputs().iter().map(|n| arrival[n.index()]).fold(0.0, f64::max);
        arrival[g.output.index()] = t + tech.cost(g.kind).delay_ms;
    }
    let endpoints = nl
        .dffs()
        .map(|(_, g)| g.inputs()[0])
        .chain(nl.outputs().iter().flat_map(|p| p.nets.iter().copied()))
        .filter(|n| !matches!(nl.driver(*n), Driver::Const(_)));
    Ok(endpoints.map(|n| arrival[n.index()]).fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub area_cm2: f64,
    pub power_mw: f64,
    pub f_max_hz: f64,
    pub freq_hz: f64,
    pub latency_ms: f64,
    pub energy_mj: f64,
    pub battery_ok: bool,
    pub cycles: usize,
    /// True when a requested target frequency exceeded `f_max_hz`.
    pub clamped: bool,
}

pub fn energy_mj(power_mw: f64, latency_ms: f64) -> f64 {
    power_mw * latency_ms / 1000.0
}

pub fn latency_ms(cycles: usize, freq_hz: f64) -> f64 {
    cycles as f64 / freq_hz * 1000.0
}

pub fn within_budget(power_mw: f64, budget_mw: f64) -> bool {
    power_mw <= budget_mw
}

pub fn battery_check(report: &CostReport, budget_mw: f64) -> bool {
    within_budget(report.power_mw, budget_mw)
}

pub fn estimate(
    census: &GateCensus,
    critical_path_ms: f64,
    cycles: usize,
    tech: &TechFile,
    target_f_hz: Option<f64>,
) -> Result<CostReport> {
    tech.validate()?;
    if census.is_empty() {
        return Err(invalid("cannot cost an empty census"));
    }
    if cycles == 0 {
        return Err(invalid("cycles must be at least 1"));
    }
    if !(critical_path_ms.is_finite() && critical_path_ms > 0.0) {
        return Err(invalid("critical path must be positive"));
    }
    if let Some(t) = target_f_hz {
        if !(t.is_finite() && t > 0.0) {
            return Err(invalid("target frequency must be positive"));
        }
    }
    let (mut area, mut power) = (0.0, 0.0);
    for (&kind, &count) in &census.counts {
        let c = tech.cost(kind);
        area += count as f64 * c.area_cm2;
        power += count as f64 * c.power_mw;
    }
    let f_max = 1000.0 / critical_path_ms;
    let (freq, clamped) = match target_f_hz {
        Some(t) if t > f_max => (f_max, true),
        Some(t) => (t, false),
        None => (f_max, false),
    };
    let latency = latency_ms(cycles, freq);
    Ok(CostReport {
        area_cm2: area,
        power_mw: power,
        f_max_hz: f_max,
        freq_hz: freq,
        latency_ms: latency,
        energy_mj: energy_mj(power, latency),
        battery_ok: within_budget(power, BATTERY_BUDGET_MW),
        cycles,
        clamped,
    })
}

/// Census, critical path and estimate in one step.
pub fn estimate_netlist(nl: &Netlist, cycles: usize, tech: &TechFile, target_f_hz: Option<f64>) -> Result<CostReport> {
    let census = crate::census::gate_census(nl);
    estimate(&census, critical_path_ms(nl, tech)?, cycles, tech, target_f_hz)
}

/// Ratios `b / a` per metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignRatios {
    pub area: f64,
    pub power: f64,
    pub energy: f64,
}

pub fn compare_designs(a: &CostReport, b: &CostReport) -> Result<DesignRatios> {
    let div = |num: f64, den: f64| {
        if den == 0.0 {
            Err(invalid("ratio against a zero metric"))
        } else {
            Ok(num / den)
        }
    };
    Ok(DesignRatios {
        area: div(b.area_cm2, a.area_cm2)?,
        power: div(b.power_mw, a.power_mw)?,
        energy: div(b.energy_mj, a.energy_mj)?,
    })
}

pub fn geometric_mean(values: &[f64]) -> Result<f64> {
    if values.is_empty() || values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(invalid("geometric mean needs positive values"));
    }
    let log_sum: f64 = values.iter().map(|v| libm::log(*v)).sum();
    Ok(libm::exp(log_sum / values.len() as f64))
}

pub fn arithmetic_mean(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(invalid("mean of nothing"));
    }
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

/// Ratio of mean energies: the baseline mean over the datasets it reports,
/// against our mean over all datasets.
pub fn mean_energy_ratio(ours: &[f64], baseline: &[Option<f64>]) -> Result<f64> {
    let reported: Vec<f64> = baseline.iter().flatten().copied().collect();
    let den = arithmetic_mean(ours)?;
    if den == 0.0 {
        return Err(invalid("ratio against a zero metric"));
    }
    Ok(arithmetic_mean(&reported)? / den)
}

/// Geometric mean of per-dataset ratios where the baseline is reported.
pub fn geomean_energy_ratio(ours: &[f64], baseline: &[Option<f64>]) -> Result<f64> {
    let ratios: Vec<f64> = ours.iter().zip(baseline).filter_map(|(o, b)| b.map(|b| b / o)).collect();
    geometric_mean(&ratios)
}

/// One design's modeled metrics next to the figures it should approach.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationPoint {
    pub area_cm2: f64,
    pub power_mw: f64,
    pub f_max_hz: f64,
    pub target_area_cm2: f64,
    pub target_power_mw: f64,
    pub target_freq_hz: f64,
}

/// Least-squares scale factors `(area, power, delay)` mapping modeled to target
/// values, and the rescaled tech file.
pub fn calibrate(tech: &TechFile, points: &[CalibrationPoint]) -> Result<(TechFile, [f64; 3])> {
    if points.is_empty() {
        return Err(invalid("calibration needs at least one design"));
    }
    let fit = |pairs: &mut dyn Iterator<Item = (f64, f64)>| -> Result<f64> {
        let (num, den) = pairs.fold((0.0, 0.0), |(n, d), (x, t)| (n + x * t, d + x * x));
        if den > 0.0 && num > 0.0 {
            Ok(num / den)
        } else {
            Err(invalid("calibration data must be positive"))
        }
    };
    let area = fit(&mut points.iter().map(|p| (p.area_cm2, p.target_area_cm2)))?;
    let power = fit(&mut points.iter().map(|p| (p.power_mw, p.target_power_mw)))?;
    // delay scales the critical path, i.e. the period 1000 / f
    let delay = fit(&mut points.iter().map(|p| (1000.0 / p.f_max_hz, 1000.0 / p.target_freq_hz)))?;
    let mut out = tech.scaled(area, power, delay);
    out.name = alloc::format!("{} (calibrated)", tech.name);
    Ok((out, [area, power, delay]))
}
