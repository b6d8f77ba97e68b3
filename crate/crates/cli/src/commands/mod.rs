mod analyze;
mod baseline;
mod demo;
mod evolve;
mod fetch;

pub use analyze::{analyze, AnalyzeReport};
pub use baseline::{baseline, BaselineReport};
pub use demo::{demo_perturb, DemoCurves};
pub use evolve::{evolve, learning_curves, CurveRow, EvolveReport, IterationSummary};
pub use fetch::fetch;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::CliError;

pub(crate) fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(CliError::io(format!("creating {}", path.display())))
}

pub(crate) fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>, CliError> {
    Ok(csv::Writer::from_writer(create(path)?))
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")
        .and_then(|_| w.flush())
        .map_err(CliError::io(format!("writing {}", path.display())))
}

/// Shortest representation that reads back to the same value.
pub(crate) fn num(x: f64) -> String {
    x.to_string()
}

pub(crate) fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}
