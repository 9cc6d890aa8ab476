//! The files a run writes: per-candidate log, accuracy/cost scatter,
//! Pareto summary, run metadata, and the full design-space table.
//!
//! All CSV files use LF line endings, a single header row, and `Display`
//! float formatting (shortest exact representation). JSON files are
//! pretty-printed with a trailing newline. Apart from `run_meta.json`,
//! which records wall time, every file is a pure function of the resolved
//! configuration and the data, so equal-seed runs produce identical bytes.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use qpareto_core::flops::{flops_report, FlopsReport};
use qpareto_core::genome::SPACE_SIZE;
use qpareto_core::model::param_count;
use qpareto_core::nsga::{Individual, LogRecord};
use qpareto_core::Genome;
use serde::Serialize;

use crate::config::RunConfig;
use crate::genome_io::{genome_csv_fields, GenomeRecord, GENOME_COLUMNS};

/// Writes `generations.csv`: one row per evaluated candidate in evaluation
/// order, with its costs, accuracy, and ranking within the population that
/// scored it.
pub fn write_generations_csv(
    path: &Path,
    records: &[LogRecord],
    d_in: usize,
    n_classes: usize,
    accuracy_of: impl Fn(&Genome) -> f64,
) -> Result<()> {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "generation,{GENOME_COLUMNS},f_classical,f_quantum,f_total,params,best_val_acc,rank,crowding"
    );
    for r in records {
        let ind = &r.individual;
        let flops = flops_report(&ind.genome, d_in, n_classes);
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            r.generation,
            genome_csv_fields(&ind.genome),
            flops.f_classical,
            flops.f_quantum,
            flops.f_total,
            ind.objectives.params,
            accuracy_of(&ind.genome),
            ind.rank,
            ind.crowding,
        );
    }
    write_text(path, &s)
}

/// Writes `scatter.csv`: one row per evaluated candidate in evaluation
/// order (repeat visits to a cached genome included), with a `pareto` flag
/// marking rows no evaluated candidate dominates.
pub fn write_scatter_csv(
    path: &Path,
    records: &[LogRecord],
    d_in: usize,
    n_classes: usize,
    accuracy_of: impl Fn(&Genome) -> f64,
) -> Result<()> {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{GENOME_COLUMNS},best_val_acc,f_classical,f_quantum,f_total,params,pareto"
    );
    for r in records {
        let ind = &r.individual;
        let dominated = records
            .iter()
            .any(|other| other.individual.objectives.dominates(&ind.objectives));
        let flops = flops_report(&ind.genome, d_in, n_classes);
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            genome_csv_fields(&ind.genome),
            accuracy_of(&ind.genome),
            flops.f_classical,
            flops.f_quantum,
            flops.f_total,
            ind.objectives.params,
            u8::from(!dominated),
        );
    }
    write_text(path, &s)
}

/// One architecture inside `pareto.json`.
#[derive(Serialize)]
struct RankedEntry {
    #[serde(flatten)]
    genome: GenomeRecord,
    f_classical: u64,
    f_quantum: u64,
    f_total: u64,
    params: u64,
    error: f64,
    best_val_acc: f64,
    rank: usize,
}

#[derive(Serialize)]
struct ParetoFile {
    front: Vec<RankedEntry>,
    compromise: RankedEntry,
    top_k: Vec<RankedEntry>,
}

fn ranked_entry(
    ind: &Individual,
    d_in: usize,
    n_classes: usize,
    accuracy_of: &impl Fn(&Genome) -> f64,
) -> RankedEntry {
    let FlopsReport {
        f_classical,
        f_quantum,
        f_total,
    } = flops_report(&ind.genome, d_in, n_classes);
    RankedEntry {
        genome: GenomeRecord::from(&ind.genome),
        f_classical,
        f_quantum,
        f_total,
        params: ind.objectives.params,
        error: ind.objectives.error,
        best_val_acc: accuracy_of(&ind.genome),
        rank: ind.rank,
    }
}

/// Writes `pareto.json`: the final front, the compromise architecture, and
/// the top-k ranking.
pub fn write_pareto_json(
    path: &Path,
    front: &[Individual],
    compromise: &Individual,
    top_k: &[Individual],
    d_in: usize,
    n_classes: usize,
    accuracy_of: impl Fn(&Genome) -> f64,
) -> Result<()> {
    let entry = |ind: &Individual| ranked_entry(ind, d_in, n_classes, &accuracy_of);
    let file = ParetoFile {
        front: front.iter().map(entry).collect(),
        compromise: entry(compromise),
        top_k: top_k.iter().map(entry).collect(),
    };
    write_json(path, &file)
}

/// What `run_meta.json` records about a finished run.
#[derive(Serialize)]
pub struct RunMeta<'a> {
    /// The fully resolved configuration the run used.
    pub config: &'a RunConfig,
    /// Dataset shape after loading.
    pub n_features: usize,
    /// Class count after loading.
    pub n_classes: usize,
    /// Training samples.
    pub n_train: usize,
    /// Validation samples.
    pub n_val: usize,
    /// Generations run after the initial population.
    pub generations_executed: usize,
    /// True if stagnation ended the run before the generation budget.
    pub stopped_early: bool,
    /// Training runs executed (distinct genomes).
    pub trainings: usize,
    /// Evaluations answered from the genome cache.
    pub cache_hits: usize,
    /// Evaluations that failed and scored the error penalty.
    pub failed_evaluations: u64,
    /// Degenerate training samples skipped across all trainings.
    pub skipped_samples: u64,
    /// Wall-clock duration of the whole run.
    pub wall_time_seconds: f64,
}

/// Writes `run_meta.json`.
pub fn write_run_meta(path: &Path, meta: &RunMeta) -> Result<()> {
    write_json(path, meta)
}

/// Writes `space.csv`: every genome in the design space with its cost
/// model values for the given dataset shape, sorted by quantum FLOPs, then
/// parameter count, then canonical code. Accuracy is absent by design; the
/// table is the search-free view of the space.
pub fn write_space_csv(path: &Path, d_in: usize, n_classes: usize) -> Result<()> {
    let mut rows: Vec<(u64, u64, u64, Genome)> = (0..SPACE_SIZE)
        .map(|code| {
            let g = Genome::from_code(code);
            (
                qpareto_core::flops::quantum_flops(&g),
                param_count(&g, d_in, n_classes),
                code,
                g,
            )
        })
        .collect();
    rows.sort_by_key(|&(f, p, code, _)| (f, p, code));

    let mut s = String::new();
    let _ = writeln!(s, "{GENOME_COLUMNS},f_classical,f_quantum,f_total,params");
    for (_, params, _, g) in &rows {
        let flops = flops_report(g, d_in, n_classes);
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            genome_csv_fields(g),
            flops.f_classical,
            flops.f_quantum,
            flops.f_total,
            params,
        );
    }
    write_text(path, &s)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).context("serializing JSON")?;
    text.push('\n');
    write_text(path, &text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use qpareto_core::nsga::Objectives;

    fn individual(code: u64, error: f64, rank: usize) -> Individual {
        let genome = Genome::from_code(code);
        Individual {
            genome,
            objectives: Objectives {
                f_quantum: qpareto_core::flops::quantum_flops(&genome),
                error,
                params: param_count(&genome, 4, 3),
            },
            failed: false,
            rank,
            crowding: if rank == 0 { f64::INFINITY } else { 0.5 },
        }
    }

    #[test]
    fn generations_csv_shape_and_infinity() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("generations.csv");
        let records = vec![
            LogRecord {
                generation: 0,
                individual: individual(0, 0.25, 0),
            },
            LogRecord {
                generation: 1,
                individual: individual(9_999, 0.5, 1),
            },
        ];
        write_generations_csv(&path, &records, 4, 3, |_| 0.75).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(
            lines[0],
            "generation,n_qubits,embedding,gate0,gate1,gate2,gate3,ent_gate,topology,\
             n_layers,f_classical,f_quantum,f_total,params,best_val_acc,rank,crowding"
        );
        assert!(lines[1].starts_with("0,2,ANGLE,"));
        assert!(
            lines[1].ends_with(",0,inf"),
            "boundary crowding prints as inf: {}",
            lines[1]
        );
        assert_eq!(lines[1].split(',').count(), 17);
        assert!(text.ends_with('\n'));
        assert!(!text.contains('\r'));
    }

    #[test]
    fn scatter_logs_every_evaluation_and_flags_the_nondominated() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scatter.csv");
        // Genome 0 is small and accurate; 23_327 is the largest circuit and
        // also less accurate, so it is dominated. The repeat visit to the
        // strong genome stays in the log and carries the same flag.
        let strong = individual(0, 0.1, 0);
        let weak = individual(23_327, 0.4, 0);
        let records = vec![
            LogRecord {
                generation: 0,
                individual: strong,
            },
            LogRecord {
                generation: 0,
                individual: weak,
            },
            LogRecord {
                generation: 1,
                individual: strong,
            },
        ];
        write_scatter_csv(&path, &records, 4, 3, |_| 0.9).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4, "one row per evaluation");
        assert!(lines[1].ends_with(",1"));
        assert!(lines[2].ends_with(",0"));
        assert_eq!(lines[3], lines[1]);
    }

    #[test]
    fn pareto_json_flattens_genome_fields() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pareto.json");
        let a = individual(100, 0.2, 0);
        write_pareto_json(&path, &[a], &a, &[a], 4, 3, |_| 0.8).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["front"].as_array().unwrap().len(), 1);
        assert!(v["front"][0]["embedding"].is_string());
        assert_eq!(v["compromise"]["best_val_acc"], 0.8);
        assert_eq!(v["top_k"][0]["rank"], 0);
        assert!(text.ends_with("}\n"));
    }

    #[test]
    fn space_csv_is_the_full_sorted_design_space() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("space.csv");
        write_space_csv(&path, 4, 3).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len() as u64, SPACE_SIZE + 1);
        let mut last = (0u64, 0u64);
        for line in &lines[1..] {
            let fields: Vec<&str> = line.split(',').collect();
            let f_quantum: u64 = fields[10].parse().unwrap();
            let params: u64 = fields[12].parse().unwrap();
            assert!((f_quantum, params) >= last, "sorted by cost: {line}");
            last = (f_quantum, params);
        }
    }
}
