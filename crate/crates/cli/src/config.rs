//! Run configuration: a JSON document fully determining a pipeline run.
//!
//! CLI flags override config keys. The master seed is mandatory (flag or
//! config); per-stage seeds derive from it with fixed stream constants so
//! standalone subcommands compose to exactly what `run` produces.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use shapboost::rng::derive_seed;
use shapboost::sampling::{SplitSpec, SplitWeighting};
use shapboost::synth::GeneratorSpec;
use shapboost::{Experiment, Hyperparams};

/// Where the dataset comes from.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputConfig {
    Csv { path: PathBuf },
    Generator(Box<GeneratorSpec>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum AttributionScope {
    /// Explain the entire dataset (the replication default).
    #[default]
    Full,
    /// Explain held-out test samples only.
    #[clap(name = "test")]
    TestOnly,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub count: usize,
    pub fraction: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitConfig {
    pub test_fraction: f64,
    pub folds: usize,
    pub weighting: SplitWeighting,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig { test_fraction: 0.05, folds: 5, weighting: SplitWeighting::Weighted }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub input: InputConfig,
    #[serde(default = "default_experiments")]
    pub experiments: Vec<Experiment>,
    #[serde(default)]
    pub split: SplitConfig,
    /// Empty means the built-in replication grid.
    #[serde(default)]
    pub grid: Vec<Hyperparams>,
    #[serde(default = "default_subsample")]
    pub interaction_subsample: usize,
    #[serde(default)]
    pub attribution_scope: AttributionScope,
    #[serde(default)]
    pub bootstrap: Option<BootstrapConfig>,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: Option<u64>,
}

fn default_experiments() -> Vec<Experiment> {
    vec![Experiment::Work, Experiment::Blue, Experiment::White]
}

fn default_subsample() -> usize {
    10_000
}

impl RunConfig {
    pub fn load(path: &std::path::Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let config: RunConfig = serde_json::from_str(&text)
            .with_context(|| format!("cannot parse config {}", path.display()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.experiments.is_empty() {
            bail!("config must select at least one experiment");
        }
        if !(self.split.test_fraction > 0.0 && self.split.test_fraction < 1.0) {
            bail!("split.test_fraction must be in (0, 1)");
        }
        if self.split.folds < 2 {
            bail!("split.folds must be at least 2");
        }
        if let Some(b) = &self.bootstrap {
            if b.count < 1 || !(b.fraction > 0.0 && b.fraction <= 1.0) {
                bail!("bootstrap requires count >= 1 and fraction in (0, 1]");
            }
        }
        for hp in &self.grid {
            hp.validate().map_err(|e| anyhow::anyhow!("grid entry invalid: {e}"))?;
        }
        Ok(())
    }

    /// The grid to search: configured, or the built-in replication grid.
    pub fn effective_grid(&self) -> Vec<Hyperparams> {
        if self.grid.is_empty() {
            shapboost::gbdt::default_grid()
        } else {
            self.grid.clone()
        }
    }

    /// The master seed; errors when neither flag nor config provides one.
    pub fn require_seed(&self) -> Result<u64> {
        self.seed.ok_or_else(|| {
            anyhow::anyhow!("a seed is required: pass --seed or set \"seed\" in the config")
        })
    }
}

/// Per-stage seed streams derived from the master seed.
pub mod seeds {
    use super::*;

    fn experiment_index(e: Experiment) -> u64 {
        match e {
            Experiment::Work => 0,
            Experiment::Blue => 1,
            Experiment::White => 2,
        }
    }

    pub fn synth(master: u64) -> u64 {
        derive_seed(master, 0x01)
    }

    pub fn split(master: u64, e: Experiment) -> u64 {
        derive_seed(master, 0x10 + experiment_index(e))
    }

    pub fn folds(master: u64, e: Experiment) -> u64 {
        derive_seed(master, 0x20 + experiment_index(e))
    }

    pub fn subsample(master: u64, e: Experiment) -> u64 {
        derive_seed(master, 0x30 + experiment_index(e))
    }

    pub fn bootstrap(master: u64, e: Experiment) -> u64 {
        derive_seed(master, 0x40 + experiment_index(e))
    }

    pub fn train(master: u64, e: Experiment) -> u64 {
        derive_seed(master, 0x50 + experiment_index(e))
    }

    pub fn tune_split_spec(config: &SplitConfig, master: u64, e: Experiment) -> SplitSpec {
        SplitSpec {
            test_fraction: config.test_fraction,
            folds: config.folds,
            seed: folds(master, e),
            weighting: config.weighting,
        }
    }

    pub fn holdout_split_spec(config: &SplitConfig, master: u64, e: Experiment) -> SplitSpec {
        SplitSpec {
            test_fraction: config.test_fraction,
            folds: config.folds,
            seed: split(master, e),
            weighting: config.weighting,
        }
    }
}
