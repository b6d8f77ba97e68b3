//! Plain mini-batch SGD over the real chromosome.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::eval::{Gradient, Sample, Workspace};
use crate::genome::{Genome, RealChromosome};
use crate::graph::ActiveGraph;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub shuffle: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.01,
            batch_size: 10,
            shuffle: true,
        }
    }
}

impl TrainConfig {
    pub fn check(&self) -> Result<()> {
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!(
                "learning_rate must be >= 0, got {}",
                self.learning_rate
            )));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    pub train_loss: Vec<f64>,
    pub test_loss: Option<Vec<f64>>,
}

impl TrainHistory {
    pub fn len(&self) -> usize {
        self.train_loss.len()
    }

    pub fn is_empty(&self) -> bool {
        self.train_loss.is_empty()
    }
}

/// SGD state for a fixed topology; reuses its buffers across epochs.
pub struct Trainer<'g> {
    graph: &'g ActiveGraph,
    cfg: TrainConfig,
    order: Vec<usize>,
    grad: Gradient,
    ws: Workspace,
}

impl<'g> Trainer<'g> {
    pub fn new(graph: &'g ActiveGraph, cfg: &TrainConfig) -> Self {
        Trainer {
            graph,
            cfg: cfg.clone(),
            order: Vec::new(),
            grad: Gradient::zeros(graph),
            ws: Workspace::default(),
        }
    }

    /// One pass over `data`. Returns the unweighted mean of the batch losses.
    pub fn epoch<R: Rng + ?Sized>(&mut self, params: &mut RealChromosome, data: &Dataset, rng: &mut R) -> Result<f64> {
        if data.is_empty() {
            return Err(Error::Data("cannot train on an empty dataset".into()));
        }
        if data.n_features() != self.graph.n_inputs {
            return Err(Error::LengthMismatch {
                what: "dataset features",
                expected: self.graph.n_inputs,
                actual: data.n_features(),
            });
        }
        self.order.clear();
        self.order.extend(0..data.len());
        if self.cfg.shuffle {
            self.order.shuffle(rng);
        }
        let lr = self.cfg.learning_rate;
        let mut total = 0.0;
        let mut n_batches = 0usize;
        let mut samples: Vec<Sample<'_>> = Vec::with_capacity(self.cfg.batch_size);
        for chunk in self.order.chunks(self.cfg.batch_size) {
            samples.clear();
            samples.extend(chunk.iter().map(|&i| data.sample(i)));
            let loss = self
                .graph
                .backward_into(params, &samples, &mut self.grad, &mut self.ws)?;
            if lr != 0.0 {
                for node in &self.graph.nodes {
                    let range = node.weight_offset..node.weight_offset + node.sources.len();
                    for (w, g) in params.weights[range.clone()].iter_mut().zip(&self.grad.weights[range]) {
                        *w -= lr * g;
                    }
                    params.biases[node.bias_index] -= lr * self.grad.biases[node.bias_index];
                }
            }
            total += loss;
            n_batches += 1;
        }
        Ok(total / n_batches as f64)
    }
}

/// One SGD epoch on `genome`'s parameters.
pub fn sgd_epoch<R: Rng + ?Sized>(genome: &mut Genome, train: &Dataset, cfg: &TrainConfig, rng: &mut R) -> Result<f64> {
    cfg.check()?;
    let graph = ActiveGraph::new(genome);
    Trainer::new(&graph, cfg).epoch(&mut genome.params, train, rng)
}

/// Runs `epochs` SGD epochs. Only the real chromosome changes.
pub fn train<R: Rng + ?Sized>(
    genome: &mut Genome,
    train: &Dataset,
    epochs: usize,
    cfg: &TrainConfig,
    rng: &mut R,
) -> Result<TrainHistory> {
    train_with_test(genome, train, None, epochs, cfg, rng)
}

/// As [`train`], additionally evaluating the test MSE after every epoch.
pub fn train_with_test<R: Rng + ?Sized>(
    genome: &mut Genome,
    train: &Dataset,
    test: Option<&Dataset>,
    epochs: usize,
    cfg: &TrainConfig,
    rng: &mut R,
) -> Result<TrainHistory> {
    if epochs == 0 {
        return Err(Error::Config("epochs must be >= 1".into()));
    }
    cfg.check()?;
    let graph = ActiveGraph::new(genome);
    let mut trainer = Trainer::new(&graph, cfg);
    let mut history = TrainHistory {
        train_loss: Vec::with_capacity(epochs),
        test_loss: test.map(|_| Vec::new()),
    };
    for _ in 0..epochs {
        history.train_loss.push(trainer.epoch(&mut genome.params, train, rng)?);
        if let (Some(t), Some(out)) = (test, history.test_loss.as_mut()) {
            out.push(evaluate_graph(&graph, &genome.params, t));
        }
    }
    Ok(history)
}

/// Mean MSE over all samples. A numeric blow-up evaluates to `+inf`.
pub fn evaluate(genome: &Genome, data: &Dataset) -> f64 {
    evaluate_graph(&ActiveGraph::new(genome), &genome.params, data)
}

pub fn evaluate_graph(graph: &ActiveGraph, params: &RealChromosome, data: &Dataset) -> f64 {
    if data.is_empty() {
        return 0.0;
    }
    let mut trace = crate::eval::EvalTrace::default();
    let mut sum = 0.0;
    for s in data.samples() {
        if graph.forward_into(params, s.input, &mut trace).is_err() {
            return f64::INFINITY;
        }
        let mut err = 0.0;
        for (&slot, &t) in graph.output_slots.iter().zip(s.target) {
            let e = trace.post[slot] - t;
            err += e * e;
        }
        sum += err / graph.output_slots.len() as f64;
    }
    let mse = sum / data.len() as f64;
    if mse.is_finite() {
        mse
    } else {
        f64::INFINITY
    }
}
