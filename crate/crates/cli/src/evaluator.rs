//! Turns genomes into objective values by training the hybrid model they
//! describe, with memoization and an optional worker pool.
//!
//! Evaluation is a pure function of `(run seed, genome, dataset)`: the
//! training seed is derived from the run seed and the genome's canonical
//! code, never from population position. That makes the cache sound (a
//! genome rediscovered in a later generation gets the identical result) and
//! keeps results independent of worker count and scheduling order.

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use qpareto_core::data::Dataset;
use qpareto_core::flops::flops_report;
use qpareto_core::model::{param_count, train_genome, TrainConfig};
use qpareto_core::nsga::{Evaluation, Objectives};
use qpareto_core::seed::{self, STREAM_TRAINING};
use qpareto_core::Genome;

/// Everything one training run produced, cached per genome.
#[derive(Clone, Copy, Debug)]
pub struct GenomeOutcome {
    /// Objective values the search consumes.
    pub evaluation: Evaluation,
    /// Best validation accuracy over the trained epochs; 0 if training
    /// failed.
    pub best_val_accuracy: f64,
    /// Training samples skipped because their circuit input degenerated.
    pub skipped_samples: u64,
}

/// Memoizing evaluator over one dataset and one run configuration.
pub struct Evaluator<'a> {
    data: &'a Dataset,
    train: TrainConfig,
    run_seed: u64,
    parallelism: usize,
    cache: HashMap<Genome, GenomeOutcome>,
    /// Batch entries answered from the cache.
    pub cache_hits: usize,
    /// Training runs actually executed.
    pub trainings: usize,
    /// Sum of skipped degenerate samples over all executed trainings.
    pub skipped_samples: u64,
}

impl<'a> Evaluator<'a> {
    /// Builds an evaluator. `train.seed` is ignored; each genome gets its
    /// own derived seed.
    pub fn new(data: &'a Dataset, train: TrainConfig, run_seed: u64, parallelism: usize) -> Self {
        Evaluator {
            data,
            train,
            run_seed,
            parallelism: parallelism.max(1),
            cache: HashMap::new(),
            cache_hits: 0,
            trainings: 0,
            skipped_samples: 0,
        }
    }

    /// Evaluates a batch of genomes, training only the distinct ones not
    /// seen before. The output order matches the input order.
    pub fn evaluate_batch(&mut self, genomes: &[Genome]) -> Vec<Evaluation> {
        let mut jobs: Vec<Genome> = Vec::new();
        for g in genomes {
            if !self.cache.contains_key(g) && !jobs.contains(g) {
                jobs.push(*g);
            }
        }
        self.cache_hits += genomes.len() - jobs.len();
        self.trainings += jobs.len();

        let outcomes = if self.parallelism > 1 && jobs.len() > 1 {
            self.run_jobs_parallel(&jobs)
        } else {
            jobs.iter().map(|g| self.evaluate_one(g)).collect()
        };
        for (g, outcome) in jobs.iter().zip(outcomes) {
            self.skipped_samples += outcome.skipped_samples;
            self.cache.insert(*g, outcome);
        }

        genomes.iter().map(|g| self.cache[g].evaluation).collect()
    }

    /// Cached outcome for a genome, if it has been evaluated.
    pub fn outcome(&self, genome: &Genome) -> Option<&GenomeOutcome> {
        self.cache.get(genome)
    }

    fn run_jobs_parallel(&self, jobs: &[Genome]) -> Vec<GenomeOutcome> {
        let next = AtomicUsize::new(0);
        let slots: Vec<Mutex<Option<GenomeOutcome>>> =
            jobs.iter().map(|_| Mutex::new(None)).collect();
        let workers = self.parallelism.min(jobs.len());
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    let Some(genome) = jobs.get(i) else { break };
                    let outcome = self.evaluate_one(genome);
                    *slots[i].lock().unwrap() = Some(outcome);
                });
            }
        });
        slots
            .into_iter()
            .map(|slot| {
                slot.into_inner()
                    .unwrap()
                    .expect("worker filled every slot")
            })
            .collect()
    }

    fn evaluate_one(&self, genome: &Genome) -> GenomeOutcome {
        let flops = flops_report(genome, self.data.n_features, self.data.n_classes);
        let params = param_count(genome, self.data.n_features, self.data.n_classes);
        let mut train = self.train;
        train.seed = seed::mix(self.run_seed, &[STREAM_TRAINING, genome.code()]);
        match train_genome(genome, self.data, &train) {
            Ok(report) => GenomeOutcome {
                evaluation: Evaluation {
                    objectives: Objectives {
                        f_quantum: flops.f_quantum,
                        error: 1.0 - report.best_val_accuracy,
                        params,
                    },
                    failed: false,
                },
                best_val_accuracy: report.best_val_accuracy,
                skipped_samples: report.skipped_samples,
            },
            Err(_) => GenomeOutcome {
                evaluation: Evaluation {
                    objectives: Objectives {
                        f_quantum: flops.f_quantum,
                        error: 1.0,
                        params,
                    },
                    failed: true,
                },
                best_val_accuracy: 0.0,
                skipped_samples: 0,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use qpareto_core::seed::splitmix64;

    fn toy_dataset() -> Dataset {
        // Two well-separated 3-feature blobs with deterministic jitter.
        let mut train_x = Vec::new();
        let mut train_y = Vec::new();
        let mut val_x = Vec::new();
        let mut val_y = Vec::new();
        for i in 0..40usize {
            let class = i % 2;
            let center = if class == 0 { -1.0 } else { 1.0 };
            let row: Vec<f64> = (0..3)
                .map(|j| {
                    let u = splitmix64((i * 3 + j) as u64) % 1000;
                    center + (u as f64 / 1000.0 - 0.5) * 0.6
                })
                .collect();
            if i < 30 {
                train_x.extend(row);
                train_y.push(class);
            } else {
                val_x.extend(row);
                val_y.push(class);
            }
        }
        Dataset {
            n_features: 3,
            n_classes: 2,
            train_x,
            train_y,
            val_x,
            val_y,
        }
    }

    fn quick_train() -> TrainConfig {
        TrainConfig {
            epochs: 1,
            batch_size: 16,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn cache_avoids_retraining_and_preserves_order() {
        let data = toy_dataset();
        let mut ev = Evaluator::new(&data, quick_train(), 42, 1);
        let a = Genome::from_code(0);
        let b = Genome::from_code(1234);
        let first = ev.evaluate_batch(&[a, b, a]);
        assert_eq!(ev.trainings, 2);
        assert_eq!(ev.cache_hits, 1);
        assert_eq!(first[0].objectives, first[2].objectives);

        let second = ev.evaluate_batch(&[b, a]);
        assert_eq!(ev.trainings, 2, "nothing new to train");
        assert_eq!(ev.cache_hits, 3);
        assert_eq!(second[0].objectives, first[1].objectives);
        assert_eq!(second[1].objectives, first[0].objectives);
    }

    #[test]
    fn parallel_and_serial_agree() {
        let data = toy_dataset();
        let genomes: Vec<Genome> = (0..6).map(|i| Genome::from_code(i * 997)).collect();
        let mut serial = Evaluator::new(&data, quick_train(), 7, 1);
        let mut parallel = Evaluator::new(&data, quick_train(), 7, 3);
        let a = serial.evaluate_batch(&genomes);
        let b = parallel.evaluate_batch(&genomes);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.objectives, y.objectives);
            assert_eq!(x.failed, y.failed);
        }
    }

    #[test]
    fn outcome_reports_accuracy_consistent_with_error() {
        let data = toy_dataset();
        let mut ev = Evaluator::new(&data, quick_train(), 3, 1);
        let g = Genome::from_code(20_000);
        let eval = ev.evaluate_batch(&[g])[0];
        let outcome = ev.outcome(&g).unwrap();
        assert!((outcome.best_val_accuracy - (1.0 - eval.objectives.error)).abs() < 1e-15);
        assert!(!eval.failed);
    }

    #[test]
    fn training_seed_depends_on_genome_not_position() {
        let data = toy_dataset();
        let g = Genome::from_code(5_000);
        let mut alone = Evaluator::new(&data, quick_train(), 9, 1);
        let mut crowded = Evaluator::new(&data, quick_train(), 9, 1);
        let solo = alone.evaluate_batch(&[g])[0];
        let batch = crowded.evaluate_batch(&[Genome::from_code(1), Genome::from_code(2), g]);
        assert_eq!(solo.objectives, batch[2].objectives);
    }
}
