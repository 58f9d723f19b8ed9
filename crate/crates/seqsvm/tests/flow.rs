// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;
use std::process::Command;

use seqsvm::core::circuit::sequential::design_info;
use seqsvm::core::{build_parallel_baseline, build_sequential, equivalence_check, DesignKind, Strategy};
use seqsvm::data::{self, CsvSchema};
use seqsvm::hdl::{emit_hdl, parse_hdl};
use seqsvm::pipeline::{self, run_batch, run_pipeline, PipelineConfig};
use seqsvm::reference::ReferenceTable;
use seqsvm::report::{report_table, to_csv, COLUMNS};
use seqsvm::Stage;

fn data_dir() -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data"))
}

fn config(key: &str, out: &std::path::Path) -> PipelineConfig {
    let mut cfg = PipelineConfig::for_dataset(key);
    cfg.data.path = Some(data::spec(key).unwrap().path_in(&data_dir()));
    cfg.output_dir = out.to_path_buf();
    cfg
}

#[test]
fn pipeline_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let a = run_pipeline(&config("redwine", &tmp.path().join("a"))).unwrap();
    let b = run_pipeline(&config("redwine", &tmp.path().join("a"))).unwrap();
    assert!(a.equivalence.passed);
    assert_eq!(a.cycles, 6);
    assert_eq!(a, b);
    let elsewhere = run_pipeline(&config("redwine", &tmp.path().join("b"))).unwrap();
    for (file, hash) in &elsewhere.artifacts {
        if file != "config.json" {
            assert_eq!(&a.artifacts[file], hash, "{file}");
        }
    }
    assert!(a.artifacts.contains_key("design.v"));
    let again = pipeline::read_manifest(&tmp.path().join("a/manifest.json")).unwrap();
    assert_eq!(again, a);
}

#[test]
fn emitted_hdl_simulates_like_the_model() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config("redwine", tmp.path());
    let prepared = pipeline::prepare_data(&cfg).unwrap();
    let model = pipeline::train_model(&prepared, &cfg).unwrap();
    let q = pipeline::quantize(&model, &prepared, &cfg).unwrap().model;
    for nl in [build_sequential(&q), build_parallel_baseline(&q, Strategy::OneVsRest)] {
        let text = emit_hdl(&nl, &pipeline::hdl_meta(&q));
        assert!(text.lines().any(|l| l.starts_with("// @design seqsvm_")));
        let back = parse_hdl(&text).unwrap();
        assert_eq!(back, nl);
        let report = equivalence_check(&q, &back, &prepared.test).unwrap();
        assert_eq!(report.class_mismatches, 0);
        assert!(report.passed());
    }
    assert_eq!(design_info(&q, DesignKind::Sequential).n, 6);
}

#[test]
fn batch_runs_in_isolated_directories() {
    let tmp = tempfile::tempdir().unwrap();
    let mut second = config("redwine", &tmp.path().join("s43"));
    second = second.with_seed(43);
    let configs = vec![config("redwine", &tmp.path().join("s42")), second];
    let results: Vec<_> = run_batch(&configs).into_iter().map(Result::unwrap).collect();
    assert_eq!(results.len(), 2);
    assert!(tmp.path().join("s42/manifest.json").exists());
    assert!(tmp.path().join("s43/manifest.json").exists());
    assert_ne!(results[0].artifacts["model.json"], results[1].artifacts["model.json"]);

    let shared = vec![configs[0].clone(), configs[0].clone()];
    for r in run_batch(&shared) {
        assert_eq!(r.unwrap_err().exit_code(), Stage::Config.exit_code());
    }
}

#[test]
fn table_rows_follow_the_manifests() {
    let tmp = tempfile::tempdir().unwrap();
    let m = run_pipeline(&config("redwine", tmp.path())).unwrap();
    let rows = report_table(std::slice::from_ref(&m), None).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].dataset, "RW");
    assert_eq!(rows[0].energy_mj, rows[0].power_mw * rows[0].latency_ms / 1000.0);
    let csv = to_csv(&rows);
    assert_eq!(csv.lines().next().unwrap().split(',').count(), COLUMNS.len());
    let table = ReferenceTable::bundled();
    let with_ref = report_table(&[m], Some(&table)).unwrap();
    assert_eq!(with_ref.len(), 5);
    assert!(report_table(&[], None).is_err());
}

#[test]
fn bad_data_maps_to_the_data_code() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.csv");
    std::fs::write(&bad, "a,y\n1,p\nnope,q\n").unwrap();
    let mut cfg = PipelineConfig::default();
    cfg.data.path = Some(bad);
    cfg.data.schema = CsvSchema::default();
    cfg.output_dir = tmp.path().join("out");
    assert_eq!(run_pipeline(&cfg).unwrap_err().exit_code(), Stage::Data.exit_code());
}

fn cli() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_seqsvm"));
    c.env("SEQSVM_DATA_DIR", data_dir()).env_remove("SEQSVM_OUTPUT_ROOT");
    c
}

#[test]
fn cli_stages_chain_through_files() {
    let tmp = tempfile::tempdir().unwrap();
    let p = |name: &str| tmp.path().join(name);
    let ok = |c: &mut Command| {
        let out = c.output().unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        String::from_utf8(out.stdout).unwrap()
    };
    ok(cli().args(["train", "--dataset", "redwine", "--out"]).arg(p("model.json")));
    ok(cli().args(["quantize", "--dataset", "redwine", "--model"]).arg(p("model.json")).arg("--out").arg(p("q.json")));
    ok(cli().args(["generate", "--quantized"]).arg(p("q.json")).arg("--out").arg(p("d.v")));
    ok(cli().args(["generate", "--baseline", "ovo", "--quantized"]).arg(p("q.json")).arg("--out").arg(p("ovo.v")));
    let sim = ok(cli()
        .args(["simulate", "--x", "1,2,3,4,5,6,7,8,9,10,11", "--design"])
        .arg(p("d.v"))
        .arg("--trace")
        .arg(p("trace.csv")));
    assert!(sim.contains("after 6 cycles"), "{sim}");
    let trace = std::fs::read_to_string(p("trace.csv")).unwrap();
    let lines: Vec<&str> = trace.lines().collect();
    assert_eq!(lines[0], "cycle,counter,score_raw,id,done");
    assert_eq!(lines.len(), 1 + 7);
    assert!(lines[7].ends_with(",1"));
    let cost = ok(cli().args(["cost", "--design"]).arg(p("d.v")));
    let v: serde_json::Value = serde_json::from_str(&cost).unwrap();
    assert_eq!(v["cost"]["cycles"], 6);

    ok(cli().args(["pipeline", "--dataset", "redwine", "--out"]).arg(p("run")));
    let table = ok(cli().args(["table", "--csv", "--reference"]).arg(p("run/manifest.json")));
    assert!(table.starts_with("Dataset,Model,"), "{table}");
}

#[test]
fn cli_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let code = |c: &mut Command| c.output().unwrap().status.code().unwrap();
    let missing_tech =
        code(cli().args(["pipeline", "--dataset", "redwine", "--tech", "/nonexistent.json", "--out"]).arg(tmp.path()));
    assert_eq!(missing_tech, Stage::Config.exit_code());
    let no_data = code(
        cli().args(["pipeline", "--dataset", "cardio", "--out"]).arg(tmp.path()).env("SEQSVM_DATA_DIR", tmp.path()),
    );
    assert_eq!(no_data, Stage::Data.exit_code());
    assert_eq!(code(cli().args(["pipeline", "--dataset", "nosuch"])), Stage::Config.exit_code());
}

#[test]
fn output_root_applies_to_relative_dirs() {
    let tmp = tempfile::tempdir().unwrap();
    let out = cli()
        .args(["pipeline", "--dataset", "redwine", "--out", "rel"])
        .env("SEQSVM_OUTPUT_ROOT", tmp.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(tmp.path().join("rel/manifest.json").exists());
}
