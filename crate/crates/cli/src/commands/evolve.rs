use std::collections::BTreeMap;

use dcgpann::evolution::run_lsmf_with;
use dcgpann::trainer::{evaluate_graph, Trainer};
use dcgpann::{
    activation_histogram, rank_sum_test, rng, topology_stats, ActiveGraph, CycleLog, Dataset, Genome, GenomeShape,
    IntegerChromosome, RankSum, RealChromosome, TopologyStats, TrainConfig,
};
use rayon::prelude::*;
use serde::Serialize;

use super::{csv_writer, mean, num, write_json};
use crate::{out_dir, prepare_data, CliError, ExperimentConfig};

/// One row of `curves.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    /// 0 for the template, `j` for the best topology of iteration `j`.
    pub iteration: usize,
    /// 1-based.
    pub epoch: usize,
    pub repeat: usize,
    pub train_mse: f64,
    pub test_mse: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct IterationSummary {
    pub iteration: usize,
    pub label: &'static str,
    /// Training MSE of the selected individual in the iteration's last cycle.
    pub best_train_mse: Option<f64>,
    pub genome_file: Option<String>,
    pub stats: TopologyStats,
    pub activations: BTreeMap<String, usize>,
    /// Means over repeats of the last curve epoch.
    pub final_train_mse_mean: f64,
    pub final_test_mse_mean: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvolveReport {
    pub seed: u64,
    pub n_train: usize,
    pub n_test: usize,
    pub n_features: usize,
    pub curve_epochs: usize,
    pub repeat: usize,
    pub iterations: Vec<IterationSummary>,
    /// Final test MSE of the last iteration's topology (first sample) against
    /// the template (second sample), paired by repeat.
    pub evolved_vs_template: Option<RankSum>,
}

fn write_cycle(w: &mut csv::Writer<impl std::io::Write>, c: &CycleLog) -> csv::Result<()> {
    w.write_record([
        (c.iteration + 1).to_string(),
        (c.cycle + 1).to_string(),
        num(c.best_error),
        c.selected.to_string(),
        c.n_connection_mutations().to_string(),
        c.n_function_mutations().to_string(),
    ])?;
    w.flush()?;
    Ok(())
}

/// Retrains each topology from `repeat` fresh weight initialisations without
/// mutation. Repeat `r` uses the same initial weights and batch order for
/// every topology. Rows come out ordered by topology, repeat, epoch.
#[allow(clippy::too_many_arguments)]
pub fn learning_curves(
    topologies: &[IntegerChromosome],
    shape: &GenomeShape,
    train: &Dataset,
    test: &Dataset,
    epochs: usize,
    repeat: usize,
    cfg: &TrainConfig,
    seed: u64,
) -> Vec<CurveRow> {
    let jobs: Vec<(usize, usize)> = (0..topologies.len())
        .flat_map(|j| (0..repeat).map(move |r| (j, r)))
        .collect();
    let curves: Vec<Vec<CurveRow>> = jobs
        .par_iter()
        .map(|&(j, r)| {
            let mut init = rng::stream(seed, &[rng::CURVE, r as u64, 0]);
            let mut order = rng::stream(seed, &[rng::CURVE, r as u64, 1]);
            let genome = Genome {
                shape: shape.clone(),
                topology: topologies[j].clone(),
                params: RealChromosome::random(shape, &mut init),
            };
            let graph = ActiveGraph::new(&genome);
            let mut params = genome.params;
            let mut trainer = Trainer::new(&graph, cfg);
            let mut diverged = false;
            (1..=epochs)
                .map(|epoch| {
                    if !diverged {
                        if let Err(e) = trainer.epoch(&mut params, train, &mut order) {
                            log::warn!("curve {j} repeat {r}: diverged at epoch {epoch}: {e}");
                            diverged = true;
                        }
                    }
                    let (train_mse, test_mse) = if diverged {
                        (f64::INFINITY, f64::INFINITY)
                    } else {
                        (
                            evaluate_graph(&graph, &params, train),
                            evaluate_graph(&graph, &params, test),
                        )
                    };
                    CurveRow {
                        iteration: j,
                        epoch,
                        repeat: r,
                        train_mse,
                        test_mse,
                    }
                })
                .collect()
        })
        .collect();
    curves.concat()
}

fn final_values(rows: &[CurveRow], iteration: usize, epochs: usize) -> (Vec<f64>, Vec<f64>) {
    rows.iter()
        .filter(|c| c.iteration == iteration && c.epoch == epochs)
        .map(|c| (c.train_mse, c.test_mse))
        .unzip()
}

/// Runs the memetic search and writes `cycles.csv`, `best_genome_iter{j}.json`,
/// `curves.csv` and `summary.json` into the output directory.
pub fn evolve(cfg: &ExperimentConfig) -> Result<EvolveReport, CliError> {
    let out = out_dir(cfg)?;
    let data = prepare_data(cfg)?;
    let lsmf = cfg.lsmf(data.train.n_features());

    let mut log = csv_writer(&out.join("cycles.csv"))?;
    log.write_record([
        "iteration",
        "cycle",
        "best_train_mse",
        "selected_index",
        "n_conn_mutations",
        "n_func_mutations",
    ])?;
    let mut write_err = None;
    let results = run_lsmf_with(&lsmf, &data.train, |c| {
        if write_err.is_none() {
            write_err = write_cycle(&mut log, c).err();
        }
    })?;
    if let Some(e) = write_err {
        return Err(e.into());
    }
    drop(log);

    let template = Genome::feed_forward(&lsmf.shape, &mut rng::stream(cfg.seed, &[rng::INIT, 0]))?;
    let mut topologies = vec![template.topology.clone()];
    let mut files = vec![None];
    for r in &results {
        let name = format!("best_genome_iter{}.json", r.iteration + 1);
        r.best.save(out.join(&name))?;
        topologies.push(r.best.topology.clone());
        files.push(Some(name));
    }

    let epochs = cfg.curve_epochs();
    log::info!(
        "learning curves: {} topologies x {} repeats x {epochs} epochs",
        topologies.len(),
        cfg.repeat
    );
    let rows = learning_curves(
        &topologies,
        &lsmf.shape,
        &data.train,
        &data.test,
        epochs,
        cfg.repeat,
        &lsmf.train,
        cfg.seed,
    );
    let mut w = csv_writer(&out.join("curves.csv"))?;
    w.write_record(["iteration", "epoch", "repeat", "train_mse", "test_mse"])?;
    for c in &rows {
        w.write_record([
            c.iteration.to_string(),
            c.epoch.to_string(),
            c.repeat.to_string(),
            num(c.train_mse),
            num(c.test_mse),
        ])?;
    }
    w.flush().map_err(CliError::io("writing curves.csv"))?;

    let mut iterations = Vec::with_capacity(topologies.len());
    for (j, topology) in topologies.iter().enumerate() {
        let genome = if j == 0 {
            template.clone()
        } else {
            results[j - 1].best.clone()
        };
        debug_assert_eq!(&genome.topology, topology);
        let (tr, te) = final_values(&rows, j, epochs);
        iterations.push(IterationSummary {
            iteration: j,
            label: if j == 0 { "template" } else { "evolved" },
            best_train_mse: (j > 0).then(|| results[j - 1].best_error),
            genome_file: files[j].clone(),
            stats: topology_stats(&genome),
            activations: activation_histogram(&genome)
                .into_iter()
                .map(|(k, n)| (k.to_string(), n))
                .collect(),
            final_train_mse_mean: mean(&tr),
            final_test_mse_mean: mean(&te),
        });
    }
    let evolved_vs_template = if cfg.repeat >= 3 {
        let (_, evolved) = final_values(&rows, topologies.len() - 1, epochs);
        let (_, base) = final_values(&rows, 0, epochs);
        Some(rank_sum_test(&evolved, &base)?)
    } else {
        None
    };
    let report = EvolveReport {
        seed: cfg.seed,
        n_train: data.train.len(),
        n_test: data.test.len(),
        n_features: data.train.n_features(),
        curve_epochs: epochs,
        repeat: cfg.repeat,
        iterations,
        evolved_vs_template,
    };
    write_json(&out.join("summary.json"), &report)?;
    Ok(report)
}
