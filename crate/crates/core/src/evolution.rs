//! Learn / Select / Mutate / Forget memetic search over dCGPANN topologies,
//! plus the random-genome baseline.

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{topology_stats, TopologyStats};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::genome::{Genome, GenomeShape, RealChromosome};
use crate::graph::ActiveGraph;
use crate::rng::{self, StreamRng};
use crate::trainer::{evaluate, train, TrainConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LsmfConfig {
    /// Population size N.
    pub population: usize,
    /// Cycles per iteration K.
    pub cycles: usize,
    /// Evolutionary iterations J.
    pub iterations: usize,
    /// Cooldown C, in epochs of SGD per Learn step.
    pub cooldown: usize,
    /// Fraction of active function genes mutated.
    pub mu_functions: f64,
    /// Fraction of active connection genes mutated.
    pub mu_connections: f64,
    pub train: TrainConfig,
    pub shape: GenomeShape,
    pub seed: u64,
}

impl LsmfConfig {
    /// Published hyperparameters on the template shape.
    pub fn paper(n_inputs: usize) -> Self {
        LsmfConfig {
            population: 100,
            cycles: 30,
            iterations: 10,
            cooldown: 1,
            mu_functions: 0.02,
            mu_connections: 0.01,
            train: TrainConfig::default(),
            shape: GenomeShape::template(n_inputs),
            seed: 0,
        }
    }

    pub fn check(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Config(m.to_string()));
        if self.population < 2 {
            return fail("population must be >= 2");
        }
        if self.cycles == 0 || self.iterations == 0 || self.cooldown == 0 {
            return fail("cycles, iterations and cooldown must be >= 1");
        }
        if !(0.0..=1.0).contains(&self.mu_functions) || !(0.0..=1.0).contains(&self.mu_connections) {
            return fail("mutation rates must lie in [0, 1]");
        }
        self.train.check()?;
        self.shape.check()
    }
}

/// Gene indices changed by one mutation.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MutationSummary {
    /// Indices into `connection_genes`.
    pub connection_genes: Vec<usize>,
    /// Indices into `function_genes`.
    pub function_genes: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleLog {
    pub iteration: usize,
    pub cycle: usize,
    /// Training MSE of every individual after Learn (`+inf` for divergence).
    pub errors: Vec<f64>,
    pub selected: usize,
    pub best_error: f64,
    /// One entry per mutant.
    pub mutations: Vec<MutationSummary>,
}

impl CycleLog {
    pub fn n_connection_mutations(&self) -> usize {
        self.mutations.iter().map(|m| m.connection_genes.len()).sum()
    }

    pub fn n_function_mutations(&self) -> usize {
        self.mutations.iter().map(|m| m.function_genes.len()).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationResult {
    pub iteration: usize,
    /// Selected individual of the iteration's last cycle, with its trained weights.
    pub best: Genome,
    pub best_error: f64,
    pub cycles: Vec<CycleLog>,
    pub stats: TopologyStats,
}

/// `max(1, round(rate * count))`, or 0 when the rate or the count is 0.
pub fn mutation_count(rate: f64, count: usize) -> usize {
    if rate <= 0.0 || count == 0 {
        0
    } else {
        ((rate * count as f64).round() as usize).clamp(1, count)
    }
}

/// Active genes of a genome, as (connection gene indices, function gene indices).
/// The output neurons' kernels are not genes and never appear.
pub fn active_genes(genome: &Genome) -> (Vec<usize>, Vec<usize>) {
    let graph = ActiveGraph::new(genome);
    let n_internal = genome.shape.n_internal();
    let mut conns = Vec::new();
    let mut funcs = Vec::new();
    for node in &graph.nodes {
        conns.extend(node.weight_offset..node.weight_offset + node.sources.len());
        if node.bias_index < n_internal {
            funcs.push(node.bias_index);
        }
    }
    (conns, funcs)
}

/// Uniform draw from `range` other than `current`. `range` must hold at least two values.
fn resample_excluding<R: Rng + ?Sized>(rng: &mut R, range: std::ops::Range<usize>, current: usize) -> usize {
    let v = rng.random_range(range.start..range.end - 1);
    if v >= current {
        v + 1
    } else {
        v
    }
}

/// Mutates `round(mu_c * A_c)` active connection genes and `round(mu_a * A_f)`
/// active function genes (at least one of each for a positive rate), each to a
/// different legal value. The real chromosome is copied unchanged.
pub fn mutate<R: Rng + ?Sized>(genome: &Genome, mu_a: f64, mu_c: f64, rng: &mut R) -> (Genome, MutationSummary) {
    let shape = &genome.shape;
    let (active_conns, active_funcs) = active_genes(genome);
    let mut child = genome.clone();
    let mut summary = MutationSummary::default();

    let mut node_of_gene = Vec::new();
    for g in 0..shape.n_gene_nodes() {
        node_of_gene.extend(std::iter::repeat(g).take(shape.arity_of_gene_node(g)));
    }
    // genes with a single legal value cannot change
    let conn_candidates: Vec<usize> = active_conns
        .iter()
        .copied()
        .filter(|&i| shape.source_range(shape.column_of_gene_node(node_of_gene[i])).len() > 1)
        .collect();
    let m_c = mutation_count(mu_c, active_conns.len()).min(conn_candidates.len());
    for pick in index::sample(rng, conn_candidates.len(), m_c) {
        let gene = conn_candidates[pick];
        let range = shape.source_range(shape.column_of_gene_node(node_of_gene[gene]));
        let cur = child.topology.connection_genes[gene];
        child.topology.connection_genes[gene] = resample_excluding(rng, range, cur);
        summary.connection_genes.push(gene);
    }

    let n_kernels = shape.kernels.len();
    let m_f = if n_kernels > 1 {
        mutation_count(mu_a, active_funcs.len())
    } else {
        0
    };
    for pick in index::sample(rng, active_funcs.len(), m_f) {
        let gene = active_funcs[pick];
        let cur = child.topology.function_genes[gene];
        child.topology.function_genes[gene] = resample_excluding(rng, 0..n_kernels, cur);
        summary.function_genes.push(gene);
    }
    summary.connection_genes.sort_unstable();
    summary.function_genes.sort_unstable();
    (child, summary)
}

/// RNG used to train individual `index` in a given cycle.
pub fn learn_rng(seed: u64, iteration: usize, cycle: usize, index: usize) -> StreamRng {
    rng::stream(seed, &[rng::LEARN, iteration as u64, cycle as u64, index as u64])
}

/// Trains every individual for `cooldown` epochs (concurrently) and returns
/// their training MSE on the whole training set. Diverged individuals get `+inf`.
pub fn learn_step(
    population: &mut [Genome],
    train_data: &Dataset,
    cfg: &LsmfConfig,
    iteration: usize,
    cycle: usize,
) -> Vec<f64> {
    population
        .par_iter_mut()
        .enumerate()
        .map(|(i, genome)| {
            let mut rng = learn_rng(cfg.seed, iteration, cycle, i);
            match train(genome, train_data, cfg.cooldown, &cfg.train, &mut rng) {
                Ok(_) => evaluate(genome, train_data),
                Err(e) => {
                    log::warn!("iteration {iteration} cycle {cycle}: individual {i} diverged: {e}");
                    f64::INFINITY
                }
            }
        })
        .collect()
}

/// Index of the minimum finite error; ties go to the lowest index.
pub fn select_step(errors: &[f64]) -> Result<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &e) in errors.iter().enumerate() {
        if !e.is_finite() {
            continue;
        }
        if best.map_or(true, |(_, b)| e < b) {
            best = Some((i, e));
        }
    }
    best.map(|(i, _)| i).ok_or(Error::TotalDivergence(errors.len()))
}

/// The unaltered elite followed by `population - 1` independent mutants of it.
pub fn mutate_step<R: Rng + ?Sized>(
    best: &Genome,
    cfg: &LsmfConfig,
    rng: &mut R,
) -> (Vec<Genome>, Vec<MutationSummary>) {
    let mut population = Vec::with_capacity(cfg.population);
    let mut summaries = Vec::with_capacity(cfg.population - 1);
    population.push(best.clone());
    for _ in 1..cfg.population {
        let (child, summary) = mutate(best, cfg.mu_functions, cfg.mu_connections, rng);
        population.push(child);
        summaries.push(summary);
    }
    (population, summaries)
}

/// Fresh standard normal weights and zero biases for everyone; topology kept.
pub fn forget_step<R: Rng + ?Sized>(population: &mut [Genome], rng: &mut R) {
    for genome in population.iter_mut() {
        genome.params = RealChromosome::random(&genome.shape, rng);
    }
}

/// Runs `iterations` iterations of `cycles` Learn/Select/Mutate cycles each,
/// with a Forget step closing every iteration.
pub fn run_lsmf(cfg: &LsmfConfig, train_data: &Dataset) -> Result<Vec<IterationResult>> {
    run_lsmf_with(cfg, train_data, |_| {})
}

/// As [`run_lsmf`], calling `on_cycle` after every cycle.
pub fn run_lsmf_with(
    cfg: &LsmfConfig,
    train_data: &Dataset,
    mut on_cycle: impl FnMut(&CycleLog),
) -> Result<Vec<IterationResult>> {
    cfg.check()?;
    if train_data.n_features() != cfg.shape.n_inputs {
        return Err(Error::LengthMismatch {
            what: "dataset features",
            expected: cfg.shape.n_inputs,
            actual: train_data.n_features(),
        });
    }
    let mut population: Vec<Genome> = (0..cfg.population)
        .map(|i| Genome::feed_forward(&cfg.shape, &mut rng::stream(cfg.seed, &[rng::INIT, i as u64])))
        .collect::<Result<_>>()?;

    let mut results = Vec::with_capacity(cfg.iterations);
    for it in 0..cfg.iterations {
        let mut logs = Vec::with_capacity(cfg.cycles);
        let mut best: Option<(Genome, f64)> = None;
        for cy in 0..cfg.cycles {
            let errors = learn_step(&mut population, train_data, cfg, it, cy);
            let selected = select_step(&errors)?;
            let elite = population.swap_remove(selected);
            let mut mrng = rng::stream(cfg.seed, &[rng::MUTATE, it as u64, cy as u64]);
            let (next, mutations) = mutate_step(&elite, cfg, &mut mrng);
            population = next;
            let log = CycleLog {
                iteration: it,
                cycle: cy,
                best_error: errors[selected],
                errors,
                selected,
                mutations,
            };
            log::info!(
                "iteration {it} cycle {cy}: best train MSE {:.6e} (individual {selected})",
                log.best_error
            );
            on_cycle(&log);
            best = Some((elite, log.best_error));
            logs.push(log);
        }
        forget_step(&mut population, &mut rng::stream(cfg.seed, &[rng::FORGET, it as u64]));
        let (best, best_error) = best.expect("at least one cycle per iteration");
        results.push(IterationResult {
            iteration: it,
            stats: topology_stats(&best),
            best,
            best_error,
            cycles: logs,
        });
    }
    Ok(results)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineRecord {
    pub index: usize,
    pub train_mse: f64,
    pub test_mse: f64,
    pub outlier: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineSummary {
    pub count: usize,
    pub retained: usize,
    pub mean_test_mse: f64,
    pub std_test_mse: f64,
    pub mean_test_mse_unfiltered: f64,
    pub records: Vec<BaselineRecord>,
}

impl BaselineSummary {
    pub fn retained_test_mse(&self) -> Vec<f64> {
        self.records.iter().filter(|r| !r.outlier).map(|r| r.test_mse).collect()
    }
}

/// Number of individuals dropped as outliers: 5% of `count`, rounded up.
pub fn outlier_quota(count: usize) -> usize {
    (count * 5).div_ceil(100)
}

/// Marks the worst 5% (rounded up) as outliers, non-finite values first, and
/// summarises the rest. Standard deviation uses `n - 1`.
pub fn summarize_baseline(mut records: Vec<BaselineRecord>) -> BaselineSummary {
    let count = records.len();
    let key = |r: &BaselineRecord| {
        if r.test_mse.is_finite() {
            r.test_mse
        } else {
            f64::INFINITY
        }
    };
    let mut order: Vec<usize> = (0..count).collect();
    order.sort_by(|&a, &b| key(&records[b]).total_cmp(&key(&records[a])).then(a.cmp(&b)));
    for &i in order.iter().take(outlier_quota(count)) {
        records[i].outlier = true;
    }
    let kept: Vec<f64> = records.iter().filter(|r| !r.outlier).map(key).collect();
    let mean = kept.iter().sum::<f64>() / kept.len() as f64;
    let std = if kept.len() > 1 {
        (kept.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (kept.len() - 1) as f64).sqrt()
    } else {
        0.0
    };
    let unfiltered = records.iter().map(key).sum::<f64>() / count as f64;
    BaselineSummary {
        count,
        retained: kept.len(),
        mean_test_mse: mean,
        std_test_mse: std,
        mean_test_mse_unfiltered: unfiltered,
        records,
    }
}

/// Trains `count` random genomes for `epochs` epochs each and summarises their
/// test MSE after removing the worst 5%.
pub fn random_baseline(
    shape: &GenomeShape,
    train_data: &Dataset,
    test_data: &Dataset,
    count: usize,
    epochs: usize,
    cfg: &TrainConfig,
    seed: u64,
) -> Result<BaselineSummary> {
    if count < 20 {
        return Err(Error::Config(format!(
            "baseline needs at least 20 individuals, got {count}"
        )));
    }
    shape.check()?;
    cfg.check()?;
    let records = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng::stream(seed, &[rng::BASELINE, i as u64]);
            let mut genome = Genome::random(shape, &mut rng)?;
            let (train_mse, test_mse) = match train(&mut genome, train_data, epochs, cfg, &mut rng) {
                Ok(_) => (evaluate(&genome, train_data), evaluate(&genome, test_data)),
                Err(e) => {
                    log::warn!("baseline individual {i} diverged: {e}");
                    (f64::INFINITY, f64::INFINITY)
                }
            };
            Ok(BaselineRecord {
                index: i,
                train_mse,
                test_mse,
                outlier: false,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize_baseline(records))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn diff_counts(a: &Genome, b: &Genome) -> (usize, usize) {
        let c = a
            .topology
            .connection_genes
            .iter()
            .zip(&b.topology.connection_genes)
            .filter(|(x, y)| x != y)
            .count();
        let f = a
            .topology
            .function_genes
            .iter()
            .zip(&b.topology.function_genes)
            .filter(|(x, y)| x != y)
            .count();
        (c, f)
    }

    #[test]
    fn rounding_rule() {
        assert_eq!(mutation_count(0.01, 410), 4);
        assert_eq!(mutation_count(0.02, 40), 1);
        assert_eq!(mutation_count(0.01, 520), 5);
        assert_eq!(mutation_count(1e-9, 410), 1);
        assert_eq!(mutation_count(0.0, 410), 0);
        assert_eq!(mutation_count(1.0, 7), 7);
    }

    #[test]
    fn template_mutation_changes_four_connections_and_one_function() {
        let g = Genome::template(10, &mut ChaCha8Rng::seed_from_u64(0));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let (child, summary) = mutate(&g, 0.02, 0.01, &mut rng);
            assert_eq!(diff_counts(&g, &child), (4, 1));
            assert_eq!(summary.connection_genes.len(), 4);
            assert_eq!(summary.function_genes.len(), 1);
            assert!(child.validate().is_empty());
            assert_eq!(child.params, g.params);
            assert_eq!(child.topology.output_genes, g.topology.output_genes);
        }
    }

    #[test]
    fn tiny_rates_still_mutate_one_gene_each() {
        let g = Genome::template(3, &mut ChaCha8Rng::seed_from_u64(0));
        let (child, _) = mutate(
            &g,
            f64::MIN_POSITIVE,
            f64::MIN_POSITIVE,
            &mut ChaCha8Rng::seed_from_u64(2),
        );
        assert_eq!(diff_counts(&g, &child), (1, 1));
    }

    #[test]
    fn inactive_genes_are_never_mutated() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let shape = GenomeShape::template(4);
        for _ in 0..50 {
            let g = Genome::random(&shape, &mut rng).unwrap();
            let (conns, funcs) = active_genes(&g);
            let (child, summary) = mutate(&g, 0.2, 0.2, &mut rng);
            assert!(summary.connection_genes.iter().all(|i| conns.contains(i)));
            assert!(summary.function_genes.iter().all(|i| funcs.contains(i)));
            for (i, (a, b)) in g
                .topology
                .connection_genes
                .iter()
                .zip(&child.topology.connection_genes)
                .enumerate()
            {
                if a != b {
                    assert!(summary.connection_genes.contains(&i));
                }
            }
        }
    }

    #[test]
    fn selection_rules() {
        assert_eq!(select_step(&[0.3, 0.1, 0.2]).unwrap(), 1);
        assert_eq!(select_step(&[0.1, 0.1]).unwrap(), 0);
        assert_eq!(select_step(&[f64::INFINITY, f64::NAN, 0.4]).unwrap(), 2);
        assert!(matches!(
            select_step(&[f64::INFINITY; 3]),
            Err(Error::TotalDivergence(3))
        ));
    }

    #[test]
    fn mutate_step_keeps_elite_first() {
        let mut cfg = LsmfConfig::paper(10);
        let best = Genome::template(10, &mut ChaCha8Rng::seed_from_u64(0));
        let (pop, summaries) = mutate_step(&best, &cfg, &mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(pop.len(), 100);
        assert_eq!(summaries.len(), 99);
        assert_eq!(pop[0], best);
        assert!(pop.iter().all(|g| g.validate().is_empty()));
        cfg.population = 2;
        let (pop, _) = mutate_step(&best, &cfg, &mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(pop.len(), 2);
        assert_ne!(pop[1].topology, best.topology);
    }

    #[test]
    fn forget_resets_params_only() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let shape = GenomeShape::template(5);
        let mut pop: Vec<Genome> = (0..30).map(|_| Genome::random(&shape, &mut rng).unwrap()).collect();
        for g in pop.iter_mut() {
            g.params.biases.fill(0.7);
        }
        let topo: Vec<_> = pop.iter().map(|g| g.topology.clone()).collect();
        forget_step(&mut pop, &mut rng);
        assert!(pop.iter().zip(&topo).all(|(g, t)| &g.topology == t));
        assert!(pop.iter().all(|g| g.params.biases.iter().all(|&b| b == 0.0)));
        let w: Vec<f64> = pop.iter().flat_map(|g| g.params.weights.iter().copied()).collect();
        assert!(w.len() >= 10_000);
        let mean = w.iter().sum::<f64>() / w.len() as f64;
        let std = (w.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / w.len() as f64).sqrt();
        assert!(mean.abs() < 0.05);
        assert!((std - 1.0).abs() < 0.05);
    }

    #[test]
    fn outlier_removal_counts() {
        let mk = |n: usize| {
            summarize_baseline(
                (0..n)
                    .map(|i| BaselineRecord {
                        index: i,
                        train_mse: 0.0,
                        test_mse: i as f64,
                        outlier: false,
                    })
                    .collect(),
            )
        };
        let s = mk(100);
        assert_eq!(s.retained, 95);
        assert!(s.records[95..].iter().all(|r| r.outlier));
        assert_eq!(mk(20).retained, 19);
        assert_eq!(outlier_quota(21), 2);
        assert!(s.mean_test_mse <= s.mean_test_mse_unfiltered);
    }

    #[test]
    fn divergent_records_are_removed_first() {
        let mut records: Vec<BaselineRecord> = (0..40)
            .map(|i| BaselineRecord {
                index: i,
                train_mse: 0.0,
                test_mse: 1.0 + i as f64,
                outlier: false,
            })
            .collect();
        records[3].test_mse = f64::INFINITY;
        records[7].test_mse = f64::NAN;
        let s = summarize_baseline(records);
        assert_eq!(s.retained, 38);
        assert!(s.records[3].outlier && s.records[7].outlier);
        assert!(s.mean_test_mse.is_finite());
    }
}
