// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use seqsvm::core::cost::{estimate_netlist, TechFile};
use seqsvm::core::trainer::Strategy;
use seqsvm::core::{build_parallel_baseline, build_sequential, gate_census, simulate, QuantizedSvm, SvmModel};
use seqsvm::hdl::{emit_hdl, parse_hdl};
use seqsvm::io::{read_json, read_text, to_json, write_json, write_text};
use seqsvm::pipeline::{self, hdl_meta, run_batch, PipelineConfig};
use seqsvm::reference::ReferenceTable;
use seqsvm::report::{report_table, to_csv, to_text};
use seqsvm::{Error, Result, Stage};

#[derive(Parser)]
#[command(name = "seqsvm", version, about = "Sequential SVM classifier circuits for printed electronics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ConfigArgs {
    /// JSON pipeline config; the flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Registered dataset key (cardio, dermatology, pendigits, redwine, whitewine).
    #[arg(long)]
    dataset: Option<String>,
    /// CSV file to use instead of a registered dataset.
    #[arg(long)]
    data_file: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    tech: Option<PathBuf>,
    #[arg(long)]
    target_freq: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Baseline {
    Ovr,
    Ovo,
}

#[derive(Subcommand)]
enum Command {
    /// Train a one-vs-rest linear SVM and write it as JSON.
    Train {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Quantize a trained model, searching weight precision on the test split.
    Quantize {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        model: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Emit structural Verilog for a quantized model.
    Generate {
        #[arg(long)]
        quantized: PathBuf,
        /// Emit a fully parallel baseline instead of the sequential design.
        #[arg(long, value_enum)]
        baseline: Option<Baseline>,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Simulate a design on one raw input vector.
    Simulate {
        #[arg(long)]
        design: PathBuf,
        /// Comma-separated raw input codes, one per feature.
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        /// Write a per-cycle CSV trace here.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long, default_value_t = 1024)]
        max_cycles: usize,
    },
    /// Estimate area, power, timing and energy of a design.
    Cost {
        #[arg(long)]
        design: PathBuf,
        #[arg(long)]
        tech: Option<PathBuf>,
        /// Cycles per classification; defaults to the class count for
        /// sequential designs and 1 otherwise.
        #[arg(long)]
        cycles: Option<usize>,
        #[arg(long)]
        target_freq: Option<f64>,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Run the whole flow. Several configs or datasets run in parallel.
    Pipeline {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Additional config files for a batch run.
        #[arg(long = "batch")]
        batch: Vec<PathBuf>,
        /// Output directory; in batch mode, each run gets a subdirectory.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Build a comparison table from pipeline manifests.
    Table {
        manifests: Vec<PathBuf>,
        /// Interleave the published reference rows.
        #[arg(long)]
        reference: bool,
        #[arg(long)]
        csv: bool,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut src = std::error::Error::source(&e);
            while let Some(s) = src {
                eprintln!("  caused by: {s}");
                src = s.source();
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn config(args: &ConfigArgs) -> Result<PipelineConfig> {
    let mut cfg = match &args.config {
        Some(p) => read_json::<PipelineConfig>(p).map_err(|e| e.at(Stage::Config))?,
        None => match &args.dataset {
            Some(key) => PipelineConfig::for_dataset(key),
            None => PipelineConfig::default(),
        },
    };
    if let Some(key) = &args.dataset {
        cfg.data.key = Some(key.clone());
        cfg.data.name = key.clone();
    }
    if let Some(p) = &args.data_file {
        cfg.data.path = Some(p.clone());
        if args.dataset.is_none() {
            if let Some(stem) = p.file_stem() {
                cfg.data.name = stem.to_string_lossy().into_owned();
            }
        }
    }
    if let Some(seed) = args.seed {
        cfg = cfg.with_seed(seed);
    }
    if args.tech.is_some() {
        cfg.tech_file = args.tech.clone();
    }
    if args.target_freq.is_some() {
        cfg.target_freq_hz = args.target_freq;
    }
    cfg.validate().map_err(|e| e.at(Stage::Config))?;
    Ok(cfg)
}

fn load_design(path: &Path) -> Result<seqsvm::core::Netlist> {
    parse_hdl(&read_text(path)?).map_err(|e| e.at(Stage::Config))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train { cfg, out } => {
            let cfg = config(&cfg)?;
            let prepared = pipeline::prepare_data(&cfg).map_err(|e| e.at(Stage::Data))?;
            let model = pipeline::train_model(&prepared, &cfg).map_err(|e| e.at(Stage::Training))?;
            let acc = model.accuracy(&prepared.test)?;
            write_json(&out, &model).map_err(|e| e.at(Stage::Output))?;
            println!("trained {} classifiers, test accuracy {:.2}%", model.n(), acc * 100.0);
        }
        Command::Quantize { cfg, model, out } => {
            let cfg = config(&cfg)?;
            let model: SvmModel = read_json(&model).map_err(|e| e.at(Stage::Config))?;
            let prepared = pipeline::prepare_data(&cfg).map_err(|e| e.at(Stage::Data))?;
            let outcome = pipeline::quantize(&model, &prepared, &cfg).map_err(|e| e.at(Stage::Training))?;
            write_json(&out, &outcome.model).map_err(|e| e.at(Stage::Output))?;
            println!(
                "weights {}, accuracy {:.2}% (float {:.2}%){}",
                outcome.model.weight_format,
                outcome.accuracy * 100.0,
                outcome.float_accuracy * 100.0,
                if outcome.gate_met { "" } else { ", accuracy gate not met" }
            );
        }
        Command::Generate { quantized, baseline, out } => {
            let q: QuantizedSvm = read_json(&quantized).map_err(|e| e.at(Stage::Config))?;
            q.validate().map_err(|e| Error::from(e).at(Stage::Config))?;
            let nl = match baseline {
                None => build_sequential(&q),
                Some(Baseline::Ovr) => build_parallel_baseline(&q, Strategy::OneVsRest),
                Some(Baseline::Ovo) => build_parallel_baseline(&q, Strategy::OneVsOne),
            };
            write_text(&out, &emit_hdl(&nl, &hdl_meta(&q))).map_err(|e| e.at(Stage::Output))?;
            println!("{} gates, {} flip-flops", nl.gates().len(), nl.dffs().count());
        }
        Command::Simulate { design, x, trace, max_cycles } => {
            let nl = load_design(&design)?;
            let x: Vec<i64> = x
                .split(',')
                .map(|s| s.trim().parse::<i64>().map_err(|_| Error::Invalid(format!("bad input code '{s}'"))))
                .collect::<Result<_>>()
                .map_err(|e| e.at(Stage::Config))?;
            let (class, tr) = simulate(&nl, &x, max_cycles).map_err(|e| Error::from(e).at(Stage::Equivalence))?;
            if let Some(path) = trace {
                let mut w = csv::Writer::from_writer(Vec::new());
                let io = |e: csv::Error| Error::Invalid(e.to_string()).at(Stage::Output);
                w.write_record(["cycle", "counter", "score_raw", "id", "done"]).map_err(io)?;
                for c in &tr.cycles {
                    let rec = [
                        c.cycle.to_string(),
                        c.counter.to_string(),
                        c.score.to_string(),
                        c.class_id.to_string(),
                        u8::from(c.done).to_string(),
                    ];
                    w.write_record(rec).map_err(io)?;
                }
                let bytes = w.into_inner().map_err(|e| Error::Invalid(e.to_string()).at(Stage::Output))?;
                write_text(&path, &String::from_utf8_lossy(&bytes)).map_err(|e| e.at(Stage::Output))?;
            }
            println!("class {class} after {} cycles", tr.working().len());
        }
        Command::Cost { design, tech, cycles, target_freq, out } => {
            let nl = load_design(&design)?;
            let tech = match tech {
                Some(p) => read_json::<TechFile>(&p).map_err(|e| e.at(Stage::Config))?,
                None => TechFile::default(),
            };
            tech.validate().map_err(|e| Error::from(e).at(Stage::Config))?;
            let cycles = cycles.unwrap_or(if nl.is_sequential() { nl.info.n } else { 1 });
            let report =
                estimate_netlist(&nl, cycles, &tech, target_freq).map_err(|e| Error::from(e).at(Stage::Cost))?;
            let census = gate_census(&nl);
            let text = to_json(&serde_json::json!({ "census": census, "cost": report }));
            match out {
                Some(p) => write_text(&p, &text).map_err(|e| e.at(Stage::Output))?,
                None => print!("{text}"),
            }
        }
        Command::Pipeline { cfg, batch, out } => {
            if batch.is_empty() {
                let mut cfg = config(&cfg)?;
                if let Some(out) = out {
                    cfg.output_dir = out;
                }
                let m = pipeline::run_pipeline(&cfg)?;
                print_summary(&m);
            } else {
                let mut configs = Vec::new();
                for p in &batch {
                    let mut c: PipelineConfig = read_json(p).map_err(|e| e.at(Stage::Config))?;
                    if let Some(out) = &out {
                        let stem = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                        c.output_dir = out.join(stem);
                    }
                    configs.push(c);
                }
                let mut first_err = None;
                for r in run_batch(&configs) {
                    match r {
                        Ok(m) => print_summary(&m),
                        Err(e) => {
                            eprintln!("error: {e}");
                            first_err.get_or_insert(e);
                        }
                    }
                }
                if let Some(e) = first_err {
                    return Err(e);
                }
            }
        }
        Command::Table { manifests, reference, csv, out } => {
            let ms = manifests
                .iter()
                .map(|p| pipeline::read_manifest(p))
                .collect::<Result<Vec<_>>>()
                .map_err(|e| e.at(Stage::Config))?;
            let table = ReferenceTable::bundled();
            let rows = report_table(&ms, reference.then_some(&table)).map_err(|e| e.at(Stage::Config))?;
            let text = if csv { to_csv(&rows) } else { to_text(&rows) };
            match out {
                Some(p) => write_text(&p, &text).map_err(|e| e.at(Stage::Output))?,
                None => print!("{text}"),
            }
        }
    }
    Ok(())
}

fn print_summary(m: &pipeline::Manifest) {
    println!(
        "{}: acc {:.2}% | {} cycles | {:.2} cm2 | {:.2} mW | {:.2} Hz | {:.3} mJ | equivalence {}",
        m.dataset,
        m.accuracy * 100.0,
        m.cycles,
        m.cost.area_cm2,
        m.cost.power_mw,
        m.cost.freq_hz,
        m.cost.energy_mj,
        if m.equivalence.passed { "ok" } else { "FAILED" }
    );
}
