// SPDX-License-Identifier: Apache-2.0

//! The end-to-end flow: load, split, normalize, train, quantize, generate,
//! verify by simulation, cost, and write every artifact with a manifest.

use std::collections::BTreeMap;
use std::env;
use std::path::{Path, PathBuf};
use std::thread;

use seqsvm_core::cost::{estimate_netlist, CostReport, TechFile};
use seqsvm_core::quantizer::round_inputs;
use seqsvm_core::trainer::Strategy;
use seqsvm_core::{
    apply_normalizer, build_parallel_baseline, build_sequential, equivalence_check, fit_normalizer, gate_census,
    quantize_model, split, train_ovr, Dataset, EquivalenceReport, NormalizationParams, QuantOutcome, QuantPolicy,
    QuantizedSvm, SplitSpec, SvmModel, TrainConfig,
};
use serde::{Deserialize, Serialize};

use crate::data::{self, CsvSchema};
use crate::hdl::{emit_hdl, parse_hdl};
use crate::io::{read_json, sha256_hex, to_json, write_json, write_text};
use crate::{Error, Result, Stage};

/// Relative output directories are resolved against this directory when set.
pub const OUTPUT_ROOT_ENV: &str = "SEQSVM_OUTPUT_ROOT";

/// Where the data comes from: a registered dataset key, or an explicit file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DataSource {
    pub name: String,
    /// Registered dataset key; looked up in [`data::data_dir`] when `path` is unset.
    pub key: Option<String>,
    pub path: Option<PathBuf>,
    pub schema: CsvSchema,
}

impl Default for DataSource {
    fn default() -> Self {
        DataSource { name: String::from("dataset"), key: None, path: None, schema: CsvSchema::default() }
    }
}

impl DataSource {
    pub fn registered(key: &str) -> Self {
        DataSource { name: key.to_string(), key: Some(key.to_string()), ..Default::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub data: DataSource,
    pub split: SplitSpec,
    pub train: TrainConfig,
    pub quant: QuantPolicy,
    /// JSON tech file; the built-in defaults when unset.
    pub tech_file: Option<PathBuf>,
    pub target_freq_hz: Option<f64>,
    pub output_dir: PathBuf,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            data: DataSource::default(),
            split: SplitSpec::default(),
            train: TrainConfig::default(),
            quant: QuantPolicy::default(),
            tech_file: None,
            target_freq_hz: None,
            output_dir: PathBuf::from("out"),
        }
    }
}

impl PipelineConfig {
    /// Registry defaults for `key`, including its regularization.
    pub fn for_dataset(key: &str) -> Self {
        let mut cfg =
            PipelineConfig { data: DataSource::registered(key), output_dir: PathBuf::from(key), ..Default::default() };
        if let Some(s) = data::spec(key) {
            cfg.train.lambda = s.lambda;
        }
        cfg
    }

    /// Sets both the split and the training seed.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.split.seed = seed;
        self.train.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.split.validate()?;
        self.train.validate()?;
        self.quant.validate()?;
        if self.data.key.is_none() && self.data.path.is_none() {
            return Err(Error::Invalid("config names neither a dataset key nor a path".into()));
        }
        if let Some(key) = &self.data.key {
            if data::spec(key).is_none() {
                return Err(Error::Invalid(format!("unknown dataset key '{key}'")));
            }
        }
        if let Some(f) = self.target_freq_hz {
            if !(f.is_finite() && f > 0.0) {
                return Err(Error::Invalid("target frequency must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn load_tech(&self) -> Result<TechFile> {
        let tech = match &self.tech_file {
            Some(p) => read_json::<TechFile>(p)?,
            None => TechFile::default(),
        };
        tech.validate()?;
        Ok(tech)
    }

    /// Output directory, resolved against `$SEQSVM_OUTPUT_ROOT` when relative.
    pub fn resolved_output_dir(&self) -> PathBuf {
        match env::var_os(OUTPUT_ROOT_ENV) {
            Some(root) if self.output_dir.is_relative() => PathBuf::from(root).join(&self.output_dir),
            _ => self.output_dir.clone(),
        }
    }
}

/// Normalized train and test splits.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub train: Dataset,
    pub test: Dataset,
    pub normalizer: NormalizationParams,
    pub labels: Vec<String>,
}

pub fn prepare_data(cfg: &PipelineConfig) -> Result<Prepared> {
    let loaded = match (&cfg.data.path, &cfg.data.key) {
        (Some(path), _) => data::load_csv(path, &cfg.data.name, &cfg.data.schema)?,
        (None, Some(key)) => data::spec(key)
            .ok_or_else(|| Error::Invalid(format!("unknown dataset key '{key}'")))?
            .load_from(&data::data_dir())?,
        (None, None) => return Err(Error::Invalid("no data source".into())),
    };
    let (train, test) = split(&loaded.dataset, &cfg.split)?;
    let normalizer = fit_normalizer(&train)?;
    Ok(Prepared {
        train: apply_normalizer(&normalizer, &train)?,
        test: apply_normalizer(&normalizer, &test)?,
        normalizer,
        labels: loaded.labels,
    })
}

/// Trains on inputs already rounded to the circuit's input format.
pub fn train_model(prepared: &Prepared, cfg: &PipelineConfig) -> Result<SvmModel> {
    let rounded = round_inputs(&prepared.train, &cfg.quant.input_format());
    Ok(train_ovr(&rounded, &cfg.train)?)
}

pub fn quantize(model: &SvmModel, prepared: &Prepared, cfg: &PipelineConfig) -> Result<QuantOutcome> {
    Ok(quantize_model(model, &prepared.test, &cfg.quant)?)
}

/// Header metadata recorded in emitted HDL.
pub fn hdl_meta(q: &QuantizedSvm) -> Vec<(String, String)> {
    vec![
        ("model_sha256".into(), sha256_hex(to_json(q).as_bytes())),
        ("input_format".into(), q.input_format.to_string()),
        ("weight_format".into(), q.weight_format.to_string()),
        ("bias_format".into(), q.bias_format.to_string()),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceSummary {
    pub samples: usize,
    pub class_mismatches: usize,
    pub accumulator_agreement: f64,
    pub passed: bool,
}

impl From<&EquivalenceReport> for EquivalenceSummary {
    fn from(r: &EquivalenceReport) -> Self {
        EquivalenceSummary {
            samples: r.samples,
            class_mismatches: r.class_mismatches,
            accumulator_agreement: r.accumulator_agreement(),
            passed: r.passed(),
        }
    }
}

/// Everything a run produced, with a SHA-256 per artifact file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub dataset: String,
    pub m: usize,
    pub n: usize,
    pub config_sha256: String,
    pub float_accuracy: f64,
    pub accuracy: f64,
    pub gate_met: bool,
    pub weight_format: String,
    pub accumulator_width: u32,
    pub cycles: usize,
    pub gates: usize,
    pub equivalence: EquivalenceSummary,
    pub cost: CostReport,
    pub baseline_cost: CostReport,
    pub tech: String,
    pub artifacts: BTreeMap<String, String>,
}

fn staged<T>(r: Result<T>, stage: Stage) -> Result<T> {
    r.map_err(|e| e.at(stage))
}

/// Runs the whole flow and writes its artifacts into the output directory.
/// A failed equivalence check still writes everything, then returns an error
/// carrying the equivalence exit code.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<Manifest> {
    staged(cfg.validate(), Stage::Config)?;
    let tech = staged(cfg.load_tech(), Stage::Config)?;
    let prepared = staged(prepare_data(cfg), Stage::Data)?;
    let model = staged(train_model(&prepared, cfg), Stage::Training)?;
    let outcome = staged(quantize(&model, &prepared, cfg), Stage::Training)?;
    let q = &outcome.model;

    let nl = build_sequential(q);
    let hdl = emit_hdl(&nl, &hdl_meta(q));
    let reparsed = staged(parse_hdl(&hdl), Stage::Output)?;
    if reparsed != nl {
        return Err(Error::Invalid("emitted HDL does not read back to the same netlist".into()).at(Stage::Output));
    }
    let eq = staged(equivalence_check(q, &reparsed, &prepared.test).map_err(Error::from), Stage::Equivalence)?;
    let cycles = eq.latency_cycles.iter().copied().max().unwrap_or(0);
    let cost =
        staged(estimate_netlist(&nl, cycles.max(1), &tech, cfg.target_freq_hz).map_err(Error::from), Stage::Cost)?;
    let baseline = build_parallel_baseline(q, Strategy::OneVsRest);
    let baseline_cost = staged(estimate_netlist(&baseline, 1, &tech, None).map_err(Error::from), Stage::Cost)?;

    let dir = cfg.resolved_output_dir();
    let write = || -> Result<BTreeMap<String, String>> {
        let mut artifacts = BTreeMap::new();
        let mut put = |file: &str, hash: String| {
            artifacts.insert(file.to_string(), hash);
        };
        put("config.json", write_json(&dir.join("config.json"), cfg)?);
        put("normalizer.json", write_json(&dir.join("normalizer.json"), &prepared.normalizer)?);
        put("model.json", write_json(&dir.join("model.json"), &model)?);
        put("quantized.json", write_json(&dir.join("quantized.json"), q)?);
        put("quantization.json", write_json(&dir.join("quantization.json"), &outcome.candidates)?);
        write_text(&dir.join("design.v"), &hdl)?;
        put("design.v", sha256_hex(hdl.as_bytes()));
        put("census.json", write_json(&dir.join("census.json"), &gate_census(&nl))?);
        put("equivalence.json", write_json(&dir.join("equivalence.json"), &eq)?);
        put("cost.json", write_json(&dir.join("cost.json"), &cost)?);
        Ok(artifacts)
    };
    let artifacts = staged(write(), Stage::Output)?;
    let manifest = Manifest {
        dataset: prepared.train.name().to_string(),
        m: q.m,
        n: q.n,
        config_sha256: sha256_hex(to_json(cfg).as_bytes()),
        float_accuracy: outcome.float_accuracy,
        accuracy: outcome.accuracy,
        gate_met: outcome.gate_met,
        weight_format: q.weight_format.to_string(),
        accumulator_width: q.accumulator_width,
        cycles,
        gates: nl.gates().len(),
        equivalence: EquivalenceSummary::from(&eq),
        cost,
        baseline_cost,
        tech: tech.name.clone(),
        artifacts,
    };
    staged(write_json(&dir.join("manifest.json"), &manifest), Stage::Output)?;
    if !eq.passed() {
        let detail = match &eq.first_counterexample {
            Some(c) => format!(
                "{} class mismatches; first at sample {} cycle {:?}: expected {} observed {}",
                eq.class_mismatches, c.sample, c.cycle, c.expected, c.observed
            ),
            None => format!("{} class mismatches", eq.class_mismatches),
        };
        return Err(Error::Invalid(detail).at(Stage::Equivalence));
    }
    Ok(manifest)
}

/// Runs independent configs in parallel. Each must have its own output directory.
pub fn run_batch(configs: &[PipelineConfig]) -> Vec<Result<Manifest>> {
    let mut dirs: Vec<PathBuf> = configs.iter().map(PipelineConfig::resolved_output_dir).collect();
    dirs.sort();
    if dirs.windows(2).any(|w| w[0] == w[1]) {
        let e = || Err(Error::Invalid("batch configs share an output directory".into()).at(Stage::Config));
        return configs.iter().map(|_| e()).collect();
    }
    thread::scope(|s| {
        let handles: Vec<_> = configs.iter().map(|c| s.spawn(move || run_pipeline(c))).collect();
        handles.into_iter().map(|h| h.join().expect("pipeline thread panicked")).collect()
    })
}

pub fn read_manifest(path: &Path) -> Result<Manifest> {
    read_json(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trips_and_defaults_fill_in() {
        let cfg: PipelineConfig = serde_json::from_str(r#"{"data": {"key": "redwine"}}"#).unwrap();
        assert_eq!(cfg.split, SplitSpec::default());
        assert_eq!(cfg.train, TrainConfig::default());
        let back: PipelineConfig = serde_json::from_str(&to_json(&cfg)).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn invalid_configs_map_to_the_config_code() {
        let mut cfg = PipelineConfig::for_dataset("redwine");
        cfg.tech_file = Some(PathBuf::from("/nonexistent/tech.json"));
        assert_eq!(run_pipeline(&cfg).unwrap_err().exit_code(), Stage::Config.exit_code());
        let cfg = PipelineConfig::for_dataset("nosuch");
        assert_eq!(run_pipeline(&cfg).unwrap_err().exit_code(), Stage::Config.exit_code());
    }

    #[test]
    fn exit_codes_are_distinct() {
        let all = [Stage::Config, Stage::Data, Stage::Training, Stage::Equivalence, Stage::Cost, Stage::Output];
        let mut codes: Vec<i32> = all.iter().map(|s| s.exit_code()).collect();
        codes.sort();
        codes.dedup();
        assert_eq!(codes.len(), all.len());
        assert!(!codes.contains(&0));
    }
}
