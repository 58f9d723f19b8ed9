// SPDX-License-Identifier: Apache-2.0

//! Published comparison figures, bundled as JSON.

use seqsvm_core::cost::{self, energy_mj, within_budget};
use serde::{Deserialize, Serialize};

use crate::data::REGISTRY;
use crate::Result;

const TABLE_JSON: &str = include_str!("../data/reference_table.json");

pub const OURS: &str = "ours";
pub const BASELINES: [&str; 3] = ["svm_mubarik", "svm_tcad", "mlp_tc"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceRow {
    pub dataset: String,
    pub model: String,
    pub accuracy: f64,
    pub area_cm2: f64,
    pub power_mw: f64,
    pub freq_hz: f64,
    pub latency_ms: f64,
    pub energy_mj: f64,
}

impl ReferenceRow {
    /// Energy recomputed from the row's power and latency.
    pub fn derived_energy_mj(&self) -> f64 {
        energy_mj(self.power_mw, self.latency_ms)
    }

    pub fn battery_ok(&self, budget_mw: f64) -> bool {
        within_budget(self.power_mw, budget_mw)
    }

    /// Cycles implied by latency and frequency, rounded to the nearest integer.
    pub fn implied_cycles(&self) -> f64 {
        (self.latency_ms * self.freq_hz / 1000.0).round()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceTable {
    pub source: String,
    pub battery_budget_mw: f64,
    pub rows: Vec<ReferenceRow>,
}

impl ReferenceTable {
    pub fn bundled() -> ReferenceTable {
        serde_json::from_str(TABLE_JSON).expect("bundled reference table is valid JSON")
    }

    pub fn row(&self, dataset: &str, model: &str) -> Option<&ReferenceRow> {
        self.rows.iter().find(|r| r.dataset == dataset && r.model == model)
    }

    pub fn model_rows<'a>(&'a self, model: &'a str) -> impl Iterator<Item = &'a ReferenceRow> + 'a {
        self.rows.iter().filter(move |r| r.model == model)
    }

    /// Energies of `model` in registry order; `None` where it is not reported.
    pub fn energies(&self, model: &str) -> Vec<Option<f64>> {
        REGISTRY.iter().map(|s| self.row(s.key, model).map(|r| r.energy_mj)).collect()
    }

    /// Mean baseline energy over the datasets it reports, divided by our mean
    /// energy over all datasets.
    pub fn energy_improvement(&self, baseline: &str) -> Result<f64> {
        let ours: Vec<f64> = self.energies(OURS).into_iter().flatten().collect();
        Ok(cost::mean_energy_ratio(&ours, &self.energies(baseline))?)
    }

    /// Geometric mean of per-dataset energy ratios against `baseline`.
    pub fn energy_improvement_geomean(&self, baseline: &str) -> Result<f64> {
        let ours: Vec<f64> = self.energies(OURS).into_iter().map(|e| e.unwrap_or(f64::NAN)).collect();
        Ok(cost::geomean_energy_ratio(&ours, &self.energies(baseline))?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_table_is_complete() {
        let t = ReferenceTable::bundled();
        assert_eq!(t.rows.len(), 18);
        for s in REGISTRY {
            assert!(t.row(s.key, OURS).is_some(), "{}", s.key);
            assert!(t.row(s.key, "svm_mubarik").is_some(), "{}", s.key);
        }
        assert!(t.row("dermatology", "svm_tcad").is_none());
    }

    #[test]
    fn cardio_baseline_energy_ratio() {
        let t = ReferenceTable::bundled();
        let r = t.row("cardio", "svm_mubarik").unwrap().energy_mj / t.row("cardio", OURS).unwrap().energy_mj;
        assert!((r - 3.139).abs() < 0.01);
    }
}
