// SPDX-License-Identifier: Apache-2.0

//! Comparison table in the usual column order:
//! Dataset, Model, Acc., Area, Power, Freq., Latency, Energy.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::data::spec;
use crate::pipeline::Manifest;
use crate::reference::ReferenceTable;
use crate::{Error, Result};

pub const COLUMNS: [&str; 8] =
    ["Dataset", "Model", "Acc. (%)", "Area (cm2)", "Power (mW)", "Freq. (Hz)", "Latency (ms)", "Energy (mJ)"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub dataset: String,
    pub model: String,
    pub accuracy_pct: f64,
    pub area_cm2: f64,
    pub power_mw: f64,
    pub freq_hz: f64,
    pub latency_ms: f64,
    pub energy_mj: f64,
}

fn display_name(key: &str) -> String {
    spec(key).map_or_else(|| key.to_string(), |s| s.display.to_string())
}

impl ReportRow {
    pub fn from_manifest(m: &Manifest) -> Self {
        ReportRow {
            dataset: display_name(&m.dataset),
            model: "sequential".into(),
            accuracy_pct: m.accuracy * 100.0,
            area_cm2: m.cost.area_cm2,
            power_mw: m.cost.power_mw,
            freq_hz: m.cost.freq_hz,
            latency_ms: m.cost.latency_ms,
            energy_mj: m.cost.energy_mj,
        }
    }

    fn cells(&self) -> [String; 8] {
        [
            self.dataset.clone(),
            self.model.clone(),
            format!("{:.1}", self.accuracy_pct),
            format!("{:.2}", self.area_cm2),
            format!("{:.2}", self.power_mw),
            format!("{:.2}", self.freq_hz),
            format!("{:.1}", self.latency_ms),
            format!("{:.4}", self.energy_mj),
        ]
    }
}

/// One row per manifest, optionally followed for each dataset by the
/// published reference rows of the same dataset.
pub fn report_table(manifests: &[Manifest], reference: Option<&ReferenceTable>) -> Result<Vec<ReportRow>> {
    if manifests.is_empty() {
        return Err(Error::Invalid("report needs at least one manifest".into()));
    }
    let mut rows = Vec::new();
    for m in manifests {
        rows.push(ReportRow::from_manifest(m));
        if let Some(t) = reference {
            rows.extend(t.rows.iter().filter(|r| r.dataset == m.dataset).map(|r| ReportRow {
                dataset: display_name(&r.dataset),
                model: format!("ref:{}", r.model),
                accuracy_pct: r.accuracy,
                area_cm2: r.area_cm2,
                power_mw: r.power_mw,
                freq_hz: r.freq_hz,
                latency_ms: r.latency_ms,
                energy_mj: r.energy_mj,
            }));
        }
    }
    Ok(rows)
}

pub fn to_csv(rows: &[ReportRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(COLUMNS).expect("in-memory write");
    for r in rows {
        w.write_record(r.cells()).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is UTF-8")
}

/// Aligned plain-text rendering.
pub fn to_text(rows: &[ReportRow]) -> String {
    let cells: Vec<[String; 8]> = rows.iter().map(ReportRow::cells).collect();
    let mut widths = COLUMNS.map(str::len);
    for r in &cells {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.len());
        }
    }
    let mut out = String::new();
    let line = |out: &mut String, r: &[String]| {
        let padded: Vec<String> = r.iter().zip(widths).map(|(c, w)| format!("{c:>w$}")).collect();
        let _ = writeln!(out, "{}", padded.join("  ").trim_end());
    };
    line(&mut out, &COLUMNS.map(String::from));
    for r in &cells {
        line(&mut out, r);
    }
    out
}
