use std::path::Path;

use dcgpann::{random_baseline, rank_sum_test, RankSum};
use serde::Serialize;

use super::{csv_writer, num, write_json};
use crate::{out_dir, prepare_data, CliError, ExperimentConfig};

#[derive(Debug, Clone, Serialize)]
pub struct EvolvedComparison {
    pub curves_file: String,
    pub iteration: usize,
    pub epoch: usize,
    pub evolved_mean_test_mse: f64,
    /// First sample: evolved final test MSE per repeat; second: retained baseline.
    pub rank_sum: RankSum,
}

#[derive(Debug, Clone, Serialize)]
pub struct BaselineReport {
    pub seed: u64,
    pub count: usize,
    pub retained: usize,
    pub epochs: usize,
    pub mean_test_mse: f64,
    pub std_test_mse: f64,
    pub mean_test_mse_unfiltered: f64,
    pub evolved_vs_baseline: Option<EvolvedComparison>,
}

/// Final-epoch test MSE per repeat for the last iteration found in a
/// `curves.csv` written by `evolve`.
fn last_iteration_finals(path: &Path) -> Result<Option<(usize, usize, Vec<f64>)>, CliError> {
    if !path.is_file() {
        return Ok(None);
    }
    let mut rdr = csv::Reader::from_path(path)?;
    let mut rows: Vec<(usize, usize, f64)> = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let field = |i: usize| rec.get(i).unwrap_or_default().to_string();
        let parse_err = || CliError::Io {
            context: format!("reading {}", path.display()),
            source: std::io::Error::new(
                std::io::ErrorKind::InvalidData,
                format!("malformed row {:?}", rec.as_slice()),
            ),
        };
        let it: usize = field(0).parse().map_err(|_| parse_err())?;
        let ep: usize = field(1).parse().map_err(|_| parse_err())?;
        let test: f64 = field(4).parse().map_err(|_| parse_err())?;
        rows.push((it, ep, test));
    }
    let Some(last_it) = rows.iter().map(|r| r.0).max() else {
        return Ok(None);
    };
    let last_ep = rows.iter().filter(|r| r.0 == last_it).map(|r| r.1).max().unwrap_or(0);
    let finals = rows
        .iter()
        .filter(|r| r.0 == last_it && r.1 == last_ep)
        .map(|r| r.2)
        .collect();
    Ok(Some((last_it, last_ep, finals)))
}

/// Trains random genomes with the evolved runs' epoch budget and writes
/// `baseline.csv` and `baseline_summary.json`. When the output directory also
/// holds an evolve run's `curves.csv`, the summary carries a rank-sum test of
/// the evolved final test errors against the retained baseline.
pub fn baseline(cfg: &ExperimentConfig) -> Result<BaselineReport, CliError> {
    let out = out_dir(cfg)?;
    let data = prepare_data(cfg)?;
    let shape = cfg.shape(data.train.n_features());
    let epochs = cfg.baseline_epochs();
    log::info!("baseline: {} random genomes x {epochs} epochs", cfg.baseline_count);
    let summary = random_baseline(
        &shape,
        &data.train,
        &data.test,
        cfg.baseline_count,
        epochs,
        &cfg.train(),
        cfg.seed,
    )?;

    let mut w = csv_writer(&out.join("baseline.csv"))?;
    w.write_record(["index", "train_mse", "test_mse", "outlier"])?;
    for r in &summary.records {
        w.write_record([
            r.index.to_string(),
            num(r.train_mse),
            num(r.test_mse),
            r.outlier.to_string(),
        ])?;
    }
    w.flush().map_err(CliError::io("writing baseline.csv"))?;

    let curves = out.join("curves.csv");
    let evolved_vs_baseline = match last_iteration_finals(&curves)? {
        Some((iteration, epoch, finals)) if finals.len() >= 3 => Some(EvolvedComparison {
            curves_file: "curves.csv".into(),
            iteration,
            epoch,
            evolved_mean_test_mse: super::mean(&finals),
            rank_sum: rank_sum_test(&finals, &summary.retained_test_mse())?,
        }),
        _ => None,
    };
    let report = BaselineReport {
        seed: cfg.seed,
        count: summary.count,
        retained: summary.retained,
        epochs,
        mean_test_mse: summary.mean_test_mse,
        std_test_mse: summary.std_test_mse,
        mean_test_mse_unfiltered: summary.mean_test_mse_unfiltered,
        evolved_vs_baseline,
    };
    write_json(&out.join("baseline_summary.json"), &report)?;
    Ok(report)
}
