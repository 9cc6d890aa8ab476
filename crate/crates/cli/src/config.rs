//! Run configuration: defaults, optional TOML file, command-line overrides.
//!
//! Precedence is flag > config file > default, resolved field by field. The
//! resolved struct is what lands in `run_meta.json`, so a run can always be
//! reproduced from its metadata alone.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

/// A fully resolved run configuration.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct RunConfig {
    /// Dataset name: iris, wine, breast_cancer, digits, or mnist.
    pub dataset: String,
    /// Directory holding the data files and the checksum manifest.
    pub data_dir: PathBuf,
    /// Directory the output files are written into (created if missing).
    pub out: PathBuf,
    /// Base seed; every random choice in the run derives from it.
    pub seed: u64,
    /// Population size.
    pub pop_size: usize,
    /// Generation budget after the initial population.
    pub generations: usize,
    /// Crossover probability.
    pub pc: f64,
    /// Per-gene mutation probability.
    pub pm: f64,
    /// Stop after this many consecutive generations with an unchanged
    /// front.
    pub stagnation: usize,
    /// Training epochs per candidate.
    pub epochs: usize,
    /// Training batch size.
    pub batch_size: usize,
    /// Adam learning rate.
    pub lr: f64,
    /// Number of ranked individuals reported alongside the front.
    pub top_k: usize,
    /// Worker threads for candidate evaluation.
    pub parallelism: usize,
}

/// The same fields, all optional: one layer of the precedence chain.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigLayer {
    pub dataset: Option<String>,
    pub data_dir: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub pop_size: Option<usize>,
    pub generations: Option<usize>,
    pub pc: Option<f64>,
    pub pm: Option<f64>,
    pub stagnation: Option<usize>,
    pub epochs: Option<usize>,
    pub batch_size: Option<usize>,
    pub lr: Option<f64>,
    pub top_k: Option<usize>,
    pub parallelism: Option<usize>,
}

impl ConfigLayer {
    /// Parses a TOML config file; unknown keys are errors so typos surface
    /// immediately.
    pub fn from_file(path: &Path) -> Result<ConfigLayer> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config file {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config file {}", path.display()))
    }

    /// Fills unset fields of `self` from `lower`.
    pub fn or(self, lower: ConfigLayer) -> ConfigLayer {
        ConfigLayer {
            dataset: self.dataset.or(lower.dataset),
            data_dir: self.data_dir.or(lower.data_dir),
            out: self.out.or(lower.out),
            seed: self.seed.or(lower.seed),
            pop_size: self.pop_size.or(lower.pop_size),
            generations: self.generations.or(lower.generations),
            pc: self.pc.or(lower.pc),
            pm: self.pm.or(lower.pm),
            stagnation: self.stagnation.or(lower.stagnation),
            epochs: self.epochs.or(lower.epochs),
            batch_size: self.batch_size.or(lower.batch_size),
            lr: self.lr.or(lower.lr),
            top_k: self.top_k.or(lower.top_k),
            parallelism: self.parallelism.or(lower.parallelism),
        }
    }

    /// Applies defaults to whatever is still unset and validates the
    /// result. `dataset` has no default and must come from a flag or the
    /// file.
    pub fn resolve(self) -> Result<RunConfig> {
        let Some(dataset) = self.dataset else {
            bail!("no dataset selected; pass --dataset or set it in the config file");
        };
        let cfg = RunConfig {
            dataset,
            data_dir: self.data_dir.unwrap_or_else(|| PathBuf::from("data")),
            out: self.out.unwrap_or_else(|| PathBuf::from("out")),
            seed: self.seed.unwrap_or(42),
            pop_size: self.pop_size.unwrap_or(20),
            generations: self.generations.unwrap_or(8),
            pc: self.pc.unwrap_or(0.8),
            pm: self.pm.unwrap_or(0.2),
            stagnation: self.stagnation.unwrap_or(2),
            epochs: self.epochs.unwrap_or(5),
            batch_size: self.batch_size.unwrap_or(64),
            lr: self.lr.unwrap_or(3e-3),
            top_k: self.top_k.unwrap_or(5),
            parallelism: self.parallelism.unwrap_or_else(default_parallelism),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn default_parallelism() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

impl RunConfig {
    /// Field-range checks shared by every entry point.
    pub fn validate(&self) -> Result<()> {
        if self.pop_size < 2 {
            bail!("pop_size must be at least 2, got {}", self.pop_size);
        }
        if !(0.0..=1.0).contains(&self.pc) {
            bail!("pc must be in [0, 1], got {}", self.pc);
        }
        if !(0.0..=1.0).contains(&self.pm) {
            bail!("pm must be in [0, 1], got {}", self.pm);
        }
        if self.stagnation == 0 {
            bail!("stagnation must be at least 1");
        }
        if self.epochs == 0 {
            bail!("epochs must be at least 1");
        }
        if self.batch_size == 0 {
            bail!("batch_size must be at least 1");
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            bail!("lr must be a positive number, got {}", self.lr);
        }
        if self.top_k == 0 {
            bail!("top_k must be at least 1");
        }
        if self.parallelism == 0 {
            bail!("parallelism must be at least 1");
        }
        Ok(())
    }

    /// The evolution-engine view of this config.
    pub fn search_config(&self) -> qpareto_core::SearchConfig {
        qpareto_core::SearchConfig {
            pop_size: self.pop_size,
            generations: self.generations,
            crossover_prob: self.pc,
            mutation_prob: self.pm,
            stagnation_patience: self.stagnation,
            top_k: self.top_k,
            seed: self.seed,
        }
    }
}
