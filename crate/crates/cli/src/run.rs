//! End-to-end run orchestration: load, evaluate, search, write outputs.

use std::time::Instant;

use anyhow::{anyhow, Context, Result};
use qpareto_core::model::TrainConfig;
use qpareto_core::nsga::{run_search, Individual, SearchResult};
use qpareto_core::Genome;

use crate::config::RunConfig;
use crate::evaluator::Evaluator;
use crate::genome_io::genome_csv_fields;
use crate::loaders::load_dataset;
use crate::outputs;

/// Runs a full search and writes the four output files into `cfg.out`.
/// Progress goes to stderr, the result summary to stdout.
pub fn execute_run(cfg: &RunConfig) -> Result<SearchResult> {
    cfg.validate()?;
    let start = Instant::now();

    eprintln!("loading {} from {}", cfg.dataset, cfg.data_dir.display());
    let data = load_dataset(&cfg.dataset, &cfg.data_dir, cfg.seed)?;
    eprintln!(
        "{} samples ({} train, {} validation), {} features, {} classes",
        data.n_train() + data.n_val(),
        data.n_train(),
        data.n_val(),
        data.n_features,
        data.n_classes
    );

    let train = TrainConfig {
        epochs: cfg.epochs,
        batch_size: cfg.batch_size,
        learning_rate: cfg.lr,
        ..TrainConfig::default()
    };
    let mut evaluator = Evaluator::new(&data, train, cfg.seed, cfg.parallelism);

    let mut batch = 0usize;
    let result = run_search(&cfg.search_config(), |genomes| {
        let evals = evaluator.evaluate_batch(genomes);
        let best = evals
            .iter()
            .map(|e| e.objectives.error)
            .fold(f64::INFINITY, f64::min);
        let failed = evals.iter().filter(|e| e.failed).count();
        let label = if batch == 0 {
            "initial population".to_string()
        } else {
            format!("generation {batch}")
        };
        let failures = if failed > 0 {
            format!(", {failed} failed")
        } else {
            String::new()
        };
        eprintln!(
            "{label}: {} candidates, best error {best:.4}{failures}",
            genomes.len()
        );
        batch += 1;
        evals
    })
    .map_err(|e| anyhow!("{e}"))?;

    std::fs::create_dir_all(&cfg.out)
        .with_context(|| format!("creating output directory {}", cfg.out.display()))?;
    let accuracy = |g: &Genome| {
        evaluator
            .outcome(g)
            .map(|o| o.best_val_accuracy)
            .expect("every logged genome was evaluated")
    };
    let (d, c) = (data.n_features, data.n_classes);
    outputs::write_generations_csv(
        &cfg.out.join("generations.csv"),
        &result.records,
        d,
        c,
        accuracy,
    )?;
    outputs::write_scatter_csv(
        &cfg.out.join("scatter.csv"),
        &result.records,
        d,
        c,
        accuracy,
    )?;
    outputs::write_pareto_json(
        &cfg.out.join("pareto.json"),
        &result.pareto_front,
        &result.compromise,
        &result.top_k,
        d,
        c,
        accuracy,
    )?;
    let meta = outputs::RunMeta {
        config: cfg,
        n_features: d,
        n_classes: c,
        n_train: data.n_train(),
        n_val: data.n_val(),
        generations_executed: result.generations_executed,
        stopped_early: result.stopped_early,
        trainings: evaluator.trainings,
        cache_hits: evaluator.cache_hits,
        failed_evaluations: result.failures,
        skipped_samples: evaluator.skipped_samples,
        wall_time_seconds: start.elapsed().as_secs_f64(),
    };
    outputs::write_run_meta(&cfg.out.join("run_meta.json"), &meta)?;

    println!(
        "finished after {} generation(s){}; front size {}, {} training run(s), {} cache hit(s)",
        result.generations_executed,
        if result.stopped_early {
            " (stagnated)"
        } else {
            ""
        },
        result.pareto_front.len(),
        evaluator.trainings,
        evaluator.cache_hits,
    );
    println!("compromise: {}", describe(&result.compromise, &accuracy));
    for (i, ind) in result.top_k.iter().enumerate() {
        println!("top {}: {}", i + 1, describe(ind, &accuracy));
    }
    println!(
        "wrote generations.csv, scatter.csv, pareto.json, run_meta.json to {}",
        cfg.out.display()
    );
    Ok(result)
}

fn describe(ind: &Individual, accuracy: &impl Fn(&Genome) -> f64) -> String {
    format!(
        "[{}] acc {:.4}, quantum flops {}, params {}",
        genome_csv_fields(&ind.genome),
        accuracy(&ind.genome),
        ind.objectives.f_quantum,
        ind.objectives.params,
    )
}
