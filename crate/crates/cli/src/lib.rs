//! Experiment harness for the `dcgpann` binary: configuration, dataset
//! resolution and the subcommands that write run artifacts.

pub mod commands;
pub mod config;

use std::path::{Path, PathBuf};

use dcgpann::data::{fetch_pmlb, DEFAULT_PMLB_URL};
use dcgpann::{friedman1, load_tsv, preprocess, rng, split, SplitDataset};

pub use config::{DatasetSource, ExperimentConfig, FriedmanSpec};

pub const CACHE_ENV: &str = "DCGPANN_CACHE_DIR";
pub const DEFAULT_CACHE_DIR: &str = ".dcgpann-cache";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad command line or configuration; exit status 1.
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Run(#[from] dcgpann::Error),
    #[error("{context}: {source}")]
    Io { context: String, source: std::io::Error },
    #[error("writing CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("writing JSON: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Run(dcgpann::Error::Config(_) | dcgpann::Error::InvalidShape(_)) => 1,
            _ => 2,
        }
    }

    pub(crate) fn io(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> CliError {
        let context = context.into();
        move |source| CliError::Io { context, source }
    }
}

/// Overrides given on the command line.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub cache_dir: Option<PathBuf>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut ExperimentConfig) {
        if let Some(d) = &self.out_dir {
            cfg.out_dir = Some(d.clone());
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(c) = &self.cache_dir {
            cfg.cache_dir = Some(c.clone());
        }
    }
}

pub fn out_dir(cfg: &ExperimentConfig) -> Result<PathBuf, CliError> {
    let dir = cfg.out_dir.clone().unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&dir).map_err(CliError::io(format!("creating {}", dir.display())))?;
    Ok(dir)
}

pub fn cache_dir(explicit: Option<&Path>) -> PathBuf {
    explicit
        .map(Path::to_path_buf)
        .or_else(|| std::env::var_os(CACHE_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_CACHE_DIR))
}

/// Loads, standardizes and splits the configured dataset. The split seed is
/// derived from the master seed.
pub fn prepare_data(cfg: &ExperimentConfig) -> Result<SplitDataset, CliError> {
    let raw = match cfg.dataset() {
        DatasetSource::Friedman1(f) => friedman1(f.n_samples, f.noise_std, f.seed)?,
        DatasetSource::Path(p) => load_tsv(p)?,
        DatasetSource::Pmlb(name) => {
            let url = cfg.pmlb_url.as_deref().unwrap_or(DEFAULT_PMLB_URL);
            let fetched = fetch_pmlb(name, &cache_dir(cfg.cache_dir.as_deref()), url)?;
            load_tsv(fetched.path())?
        }
    };
    let data = preprocess(&raw)?;
    let parts = split(&data, cfg.split_ratio, rng::derive(cfg.seed, &[rng::SPLIT]))?;
    log::info!(
        "dataset: {} training rows, {} test rows, {} features",
        parts.train.len(),
        parts.test.len(),
        data.n_features()
    );
    Ok(parts)
}
