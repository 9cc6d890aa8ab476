//! Small end-to-end runs checking the output-file contracts that the
//! acceptance suite's full desk-scale runs do not pin down directly.

use std::path::{Path, PathBuf};

use qpareto_cli::config::RunConfig;
use qpareto_cli::genome_io::parse_genome_fields;
use qpareto_cli::run::execute_run;

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

fn tiny_config(out: PathBuf, parallelism: usize) -> RunConfig {
    RunConfig {
        dataset: "iris".to_string(),
        data_dir: data_dir(),
        out,
        seed: 9,
        pop_size: 6,
        generations: 2,
        pc: 0.8,
        pm: 0.2,
        stagnation: 2,
        epochs: 1,
        batch_size: 32,
        lr: 0.05,
        top_k: 3,
        parallelism,
    }
}

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join(name);
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

#[test]
fn run_outputs_honor_the_file_contracts() {
    let out = scratch("e2e_contracts");
    let cfg = tiny_config(out.clone(), 1);
    let result = execute_run(&cfg).unwrap();

    let expected_rows = cfg.pop_size * (result.generations_executed + 1);

    // Row counts: both logs carry one row per evaluation, header excluded.
    for file in ["generations.csv", "scatter.csv"] {
        let text = std::fs::read_to_string(out.join(file)).unwrap();
        assert_eq!(text.lines().count(), expected_rows + 1, "{file} row count");
        assert!(!text.contains('\r'), "{file} must use LF endings");
        // Every genome in the file parses back to a valid genome.
        for line in text.lines().skip(1) {
            let fields: Vec<&str> = line.split(',').collect();
            let offset = usize::from(file == "generations.csv");
            parse_genome_fields(&fields[offset..]).unwrap();
        }
    }

    // The front in pareto.json is mutually non-dominated, checked on the
    // in-memory result the file was written from.
    for a in &result.pareto_front {
        for b in &result.pareto_front {
            assert!(
                !a.objectives.dominates(&b.objectives),
                "front members must not dominate each other"
            );
        }
    }

    // pareto.json genomes round-trip through the record form.
    let text = std::fs::read_to_string(out.join("pareto.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    for entry in v["front"].as_array().unwrap() {
        let record: qpareto_cli::genome_io::GenomeRecord =
            serde_json::from_value(entry.clone()).unwrap();
        qpareto_core::Genome::try_from(&record).unwrap();
    }

    // run_meta.json carries the resolved config and the counters.
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("run_meta.json")).unwrap()).unwrap();
    assert_eq!(meta["config"]["dataset"], "iris");
    assert_eq!(meta["config"]["seed"], 9);
    assert_eq!(
        meta["generations_executed"].as_u64().unwrap() as usize,
        result.generations_executed
    );
    assert!(meta["wall_time_seconds"].as_f64().unwrap() > 0.0);
}

#[test]
fn worker_count_does_not_change_the_outputs() {
    let serial_out = scratch("e2e_serial");
    let parallel_out = scratch("e2e_parallel");
    execute_run(&tiny_config(serial_out.clone(), 1)).unwrap();
    execute_run(&tiny_config(parallel_out.clone(), 3)).unwrap();
    for file in ["generations.csv", "scatter.csv", "pareto.json"] {
        let a = std::fs::read(serial_out.join(file)).unwrap();
        let b = std::fs::read(parallel_out.join(file)).unwrap();
        assert_eq!(a, b, "{file} depends on worker count");
    }
}

#[test]
fn unknown_dataset_fails_with_a_named_error() {
    let out = scratch("e2e_unknown");
    let mut cfg = tiny_config(out, 1);
    cfg.dataset = "cifar".to_string();
    let err = execute_run(&cfg).unwrap_err();
    assert!(format!("{err:#}").contains("unknown dataset"));
}

#[test]
fn binary_reports_config_errors_on_stderr() {
    let output = std::process::Command::new(env!("CARGO_BIN_EXE_qpareto"))
        .args(["run", "--dataset", "iris", "--pc", "1.5"])
        .output()
        .unwrap();
    assert!(!output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(
        stderr.contains("pc"),
        "diagnostic names the field: {stderr}"
    );
}
