//! Experiment configuration files (JSON).

use std::path::{Path, PathBuf};

use dcgpann::genome::{TEMPLATE_COLS, TEMPLATE_LEVELS_BACK, TEMPLATE_ROWS};
use dcgpann::{GenomeShape, Kernel, LsmfConfig, TrainConfig};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FriedmanSpec {
    pub n_samples: usize,
    #[serde(default = "default_noise")]
    pub noise_std: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_noise() -> f64 {
    1.0
}

/// Where the data comes from: `{"pmlb": "name"}`, `{"path": "file.tsv"}` or
/// `{"friedman1": {"n_samples": 5000}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetSource {
    Pmlb(String),
    Path(PathBuf),
    Friedman1(FriedmanSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: Option<DatasetSource>,
    pub split_ratio: f64,

    pub population: usize,
    pub cycles: usize,
    pub iterations: usize,
    pub cooldown: usize,
    pub mu_functions: f64,
    pub mu_connections: f64,
    pub learning_rate: f64,
    pub batch_size: usize,

    pub rows: usize,
    pub cols: usize,
    pub levels_back: usize,
    pub kernels: Vec<Kernel>,

    pub seed: u64,
    /// Weight initialisations per topology for the learning curves.
    pub repeat: usize,
    /// Epochs per learning curve; defaults to `iterations * cycles * cooldown`.
    pub curve_epochs: Option<usize>,
    pub baseline_count: usize,
    /// Epochs per random genome; defaults to `iterations * cycles * cooldown`.
    pub baseline_epochs: Option<usize>,
    pub demo_epochs: usize,
    pub demo_interval: usize,

    pub out_dir: Option<PathBuf>,
    pub cache_dir: Option<PathBuf>,
    pub pmlb_url: Option<String>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let lsmf = LsmfConfig::paper(1);
        ExperimentConfig {
            dataset: None,
            split_ratio: 0.75,
            population: lsmf.population,
            cycles: lsmf.cycles,
            iterations: lsmf.iterations,
            cooldown: lsmf.cooldown,
            mu_functions: lsmf.mu_functions,
            mu_connections: lsmf.mu_connections,
            learning_rate: lsmf.train.learning_rate,
            batch_size: lsmf.train.batch_size,
            rows: TEMPLATE_ROWS,
            cols: TEMPLATE_COLS,
            levels_back: TEMPLATE_LEVELS_BACK,
            kernels: Kernel::ALL.to_vec(),
            seed: 0,
            repeat: 100,
            curve_epochs: None,
            baseline_count: 100,
            baseline_epochs: None,
            demo_epochs: 30,
            demo_interval: 5,
            out_dir: None,
            cache_dir: None,
            pmlb_url: None,
        }
    }
}

impl ExperimentConfig {
    /// Parses and checks a config file. Relative dataset paths are resolved
    /// against the file's directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg = Self::from_json(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })?;
        if let Some(DatasetSource::Path(p)) = &mut cfg.dataset {
            if p.is_relative() {
                if let Some(dir) = path.parent() {
                    *p = dir.join(&*p);
                }
            }
        }
        Ok(cfg)
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn check(&self) -> Result<(), CliError> {
        let bad = |field: &str, why: &str| Err(CliError::Config(format!("field `{field}`: {why}")));
        match &self.dataset {
            None => {
                return bad(
                    "dataset",
                    "missing; expected {\"pmlb\": ...}, {\"path\": ...} or {\"friedman1\": ...}",
                )
            }
            Some(DatasetSource::Friedman1(f)) if f.n_samples < 8 => {
                return bad("dataset.friedman1.n_samples", "must be >= 8")
            }
            Some(DatasetSource::Friedman1(f)) if !(f.noise_std >= 0.0 && f.noise_std.is_finite()) => {
                return bad("dataset.friedman1.noise_std", "must be finite and >= 0")
            }
            _ => {}
        }
        if !(self.split_ratio > 0.0 && self.split_ratio < 1.0) {
            return bad("split_ratio", "must be in (0, 1)");
        }
        if self.repeat == 0 {
            return bad("repeat", "must be >= 1");
        }
        if self.curve_epochs == Some(0) {
            return bad("curve_epochs", "must be >= 1");
        }
        if self.baseline_epochs == Some(0) {
            return bad("baseline_epochs", "must be >= 1");
        }
        if self.baseline_count < 20 {
            return bad("baseline_count", "must be >= 20");
        }
        if self.demo_epochs == 0 {
            return bad("demo_epochs", "must be >= 1");
        }
        if self.demo_interval == 0 {
            return bad("demo_interval", "must be >= 1");
        }
        if self.rows == 0 {
            return bad("rows", "must be >= 1");
        }
        if self.cols == 0 {
            return bad("cols", "must be >= 1");
        }
        if self.levels_back == 0 {
            return bad("levels_back", "must be >= 1");
        }
        if self.kernels.is_empty() {
            return bad("kernels", "must not be empty");
        }
        if self.population < 2 {
            return bad("population", "must be >= 2");
        }
        for (field, v) in [
            ("cycles", self.cycles),
            ("iterations", self.iterations),
            ("cooldown", self.cooldown),
        ] {
            if v == 0 {
                return bad(field, "must be >= 1");
            }
        }
        for (field, v) in [
            ("mu_functions", self.mu_functions),
            ("mu_connections", self.mu_connections),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return bad(field, "must be in [0, 1]");
            }
        }
        if !(self.learning_rate.is_finite() && self.learning_rate >= 0.0) {
            return bad("learning_rate", "must be finite and >= 0");
        }
        if self.batch_size == 0 {
            return bad("batch_size", "must be >= 1");
        }
        Ok(())
    }

    pub fn dataset(&self) -> &DatasetSource {
        self.dataset.as_ref().expect("checked on load")
    }

    /// Node grid for `n_inputs` features: the first column reads every input,
    /// later columns and the output neuron have arity `rows`.
    pub fn shape(&self, n_inputs: usize) -> GenomeShape {
        let mut arity = vec![n_inputs];
        arity.extend(std::iter::repeat(self.rows).take(self.cols));
        GenomeShape {
            n_inputs,
            n_outputs: 1,
            rows: self.rows,
            cols: self.cols,
            levels_back: self.levels_back,
            arity,
            kernels: self.kernels.clone(),
        }
    }

    pub fn train(&self) -> TrainConfig {
        TrainConfig {
            learning_rate: self.learning_rate,
            batch_size: self.batch_size,
            shuffle: true,
        }
    }

    pub fn lsmf(&self, n_inputs: usize) -> LsmfConfig {
        LsmfConfig {
            population: self.population,
            cycles: self.cycles,
            iterations: self.iterations,
            cooldown: self.cooldown,
            mu_functions: self.mu_functions,
            mu_connections: self.mu_connections,
            train: self.train(),
            shape: self.shape(n_inputs),
            seed: self.seed,
        }
    }

    /// Training epochs one evolutionary run spends per iteration schedule.
    pub fn evolution_budget(&self) -> usize {
        self.iterations * self.cycles * self.cooldown
    }

    pub fn curve_epochs(&self) -> usize {
        self.curve_epochs.unwrap_or_else(|| self.evolution_budget())
    }

    pub fn baseline_epochs(&self) -> usize {
        self.baseline_epochs.unwrap_or_else(|| self.evolution_budget())
    }
}
