use dcgpann::{mutate, rng, sgd_epoch, Dataset, Genome, TrainConfig};

use super::{csv_writer, num};
use crate::{out_dir, prepare_data, CliError, ExperimentConfig};

/// Per-epoch mean mini-batch loss of the plain and the perturbed run.
#[derive(Debug, Clone, PartialEq)]
pub struct DemoCurves {
    pub plain: Vec<f64>,
    pub perturbed: Vec<f64>,
    /// 1-based epochs preceded by a mutation.
    pub mutation_epochs: Vec<usize>,
}

fn run(
    mut genome: Genome,
    data: &Dataset,
    cfg: &TrainConfig,
    epochs: usize,
    mut perturb: impl FnMut(usize, &Genome) -> Option<Genome>,
    seed: u64,
) -> Vec<f64> {
    let mut order = rng::stream(seed, &[rng::DEMO, 1]);
    let mut losses = Vec::with_capacity(epochs);
    for epoch in 1..=epochs {
        if let Some(next) = perturb(epoch, &genome) {
            genome = next;
        }
        match sgd_epoch(&mut genome, data, cfg, &mut order) {
            Ok(loss) => losses.push(loss),
            Err(e) => {
                log::warn!("epoch {epoch}: training diverged: {e}");
                losses.resize(epochs, f64::INFINITY);
                break;
            }
        }
    }
    losses
}

/// Trains one template twice from identical weights and batch order: plain
/// SGD, and SGD with a cumulative topology mutation before every
/// `demo_interval`-th epoch boundary. Writes `perturb.csv`.
pub fn demo_perturb(cfg: &ExperimentConfig) -> Result<DemoCurves, CliError> {
    let out = out_dir(cfg)?;
    let data = prepare_data(cfg)?;
    let shape = cfg.shape(data.train.n_features());
    let start = Genome::feed_forward(&shape, &mut rng::stream(cfg.seed, &[rng::DEMO, 0]))?;
    let train_cfg = cfg.train();
    let (epochs, interval) = (cfg.demo_epochs, cfg.demo_interval);

    let plain = run(start.clone(), &data.train, &train_cfg, epochs, |_, _| None, cfg.seed);
    let mut mutations = rng::stream(cfg.seed, &[rng::DEMO, 2]);
    let mut mutation_epochs = Vec::new();
    let perturbed = run(
        start,
        &data.train,
        &train_cfg,
        epochs,
        |epoch, g| {
            if epoch > 1 && (epoch - 1) % interval == 0 {
                mutation_epochs.push(epoch);
                Some(mutate(g, cfg.mu_functions, cfg.mu_connections, &mut mutations).0)
            } else {
                None
            }
        },
        cfg.seed,
    );

    let mut w = csv_writer(&out.join("perturb.csv"))?;
    w.write_record(["epoch", "sgd_loss", "perturbed_loss", "mutated"])?;
    for e in 0..epochs {
        let mutated = mutation_epochs.contains(&(e + 1));
        w.write_record([
            (e + 1).to_string(),
            num(plain[e]),
            num(perturbed[e]),
            mutated.to_string(),
        ])?;
    }
    w.flush().map_err(CliError::io("writing perturb.csv"))?;
    Ok(DemoCurves {
        plain,
        perturbed,
        mutation_epochs,
    })
}
