//! Forward evaluation, MSE loss and reverse-mode gradients over an [`ActiveGraph`].

use crate::error::{Error, Result};
use crate::genome::RealChromosome;
use crate::graph::ActiveGraph;

/// One training example.
#[derive(Debug, Clone, Copy)]
pub struct Sample<'a> {
    pub input: &'a [f64],
    pub target: &'a [f64],
}

/// Intermediate values of one forward pass, indexed by buffer slot.
/// Input slots carry the raw input in both vectors.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EvalTrace {
    pub pre: Vec<f64>,
    pub post: Vec<f64>,
}

/// Loss gradient laid out exactly like [`RealChromosome`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl Gradient {
    pub fn zeros(graph: &ActiveGraph) -> Self {
        Gradient {
            weights: vec![0.0; graph.n_weights],
            biases: vec![0.0; graph.n_biases],
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.weights.iter().chain(self.biases.iter()).copied()
    }
}

impl ActiveGraph {
    /// Evaluates every active node into `trace`, which is resized as needed.
    pub fn forward_into(&self, params: &RealChromosome, input: &[f64], trace: &mut EvalTrace) -> Result<()> {
        if input.len() != self.n_inputs {
            return Err(Error::LengthMismatch {
                what: "input",
                expected: self.n_inputs,
                actual: input.len(),
            });
        }
        let n_slots = self.n_slots();
        trace.pre.resize(n_slots, 0.0);
        trace.post.resize(n_slots, 0.0);
        trace.pre[..self.n_inputs].copy_from_slice(input);
        trace.post[..self.n_inputs].copy_from_slice(input);
        for (k, node) in self.nodes.iter().enumerate() {
            let w = &params.weights[node.weight_offset..node.weight_offset + node.source_slots.len()];
            let mut acc = params.biases[node.bias_index];
            for (&s, &wj) in node.source_slots.iter().zip(w) {
                acc += wj * trace.post[s];
            }
            let y = node.kernel.eval(acc);
            if !y.is_finite() {
                return Err(Error::NonFiniteNode {
                    node: node.id,
                    pre: acc,
                });
            }
            let slot = self.n_inputs + k;
            trace.pre[slot] = acc;
            trace.post[slot] = y;
        }
        Ok(())
    }

    pub fn forward(&self, params: &RealChromosome, input: &[f64]) -> Result<(Vec<f64>, EvalTrace)> {
        let mut trace = EvalTrace::default();
        self.forward_into(params, input, &mut trace)?;
        let out = self.output_slots.iter().map(|&s| trace.post[s]).collect();
        Ok((out, trace))
    }

    pub fn predict(&self, params: &RealChromosome, input: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward(params, input)?.0)
    }

    /// Batch-mean MSE and its exact gradient with respect to every weight and
    /// bias. Samples are accumulated in index order.
    pub fn backward(&self, params: &RealChromosome, batch: &[Sample<'_>]) -> Result<(f64, Gradient)> {
        let mut grad = Gradient::zeros(self);
        let loss = self.backward_into(params, batch, &mut grad, &mut Workspace::default())?;
        Ok((loss, grad))
    }

    /// Like [`backward`](Self::backward) but reuses caller-provided buffers.
    /// `grad` is overwritten.
    pub fn backward_into(
        &self,
        params: &RealChromosome,
        batch: &[Sample<'_>],
        grad: &mut Gradient,
        ws: &mut Workspace,
    ) -> Result<f64> {
        if batch.is_empty() {
            return Err(Error::Data("backward needs a non-empty batch".into()));
        }
        let m = self.output_slots.len();
        grad.weights.iter_mut().for_each(|g| *g = 0.0);
        grad.biases.iter_mut().for_each(|g| *g = 0.0);
        ws.adjoint.resize(self.n_slots(), 0.0);
        let scale = 1.0 / (batch.len() * m) as f64;
        let mut loss = 0.0;

        for sample in batch {
            if sample.target.len() != m {
                return Err(Error::LengthMismatch {
                    what: "target",
                    expected: m,
                    actual: sample.target.len(),
                });
            }
            self.forward_into(params, sample.input, &mut ws.trace)?;
            let trace = &ws.trace;
            let adj = &mut ws.adjoint;
            adj.fill(0.0);
            for (&slot, &t) in self.output_slots.iter().zip(sample.target) {
                let e = trace.post[slot] - t;
                loss += e * e * scale;
                adj[slot] += 2.0 * e * scale;
            }
            for (k, node) in self.nodes.iter().enumerate().rev() {
                let slot = self.n_inputs + k;
                if adj[slot] == 0.0 {
                    continue;
                }
                let delta = adj[slot] * node.kernel.grad_from(trace.pre[slot], trace.post[slot]);
                grad.biases[node.bias_index] += delta;
                let off = node.weight_offset;
                for (j, &s) in node.source_slots.iter().enumerate() {
                    grad.weights[off + j] += delta * trace.post[s];
                    adj[s] += delta * params.weights[off + j];
                }
            }
        }

        if !loss.is_finite() {
            return Err(Error::NonFinite {
                what: "loss",
                detail: format!("batch loss is {loss}"),
            });
        }
        if let Some(i) = grad.iter().position(|g| !g.is_finite()) {
            return Err(Error::NonFinite {
                what: "gradient",
                detail: format!("component {i}"),
            });
        }
        Ok(loss)
    }
}

/// Scratch buffers for repeated backward passes.
#[derive(Debug, Default, Clone)]
pub struct Workspace {
    trace: EvalTrace,
    adjoint: Vec<f64>,
}

pub fn forward(graph: &ActiveGraph, params: &RealChromosome, input: &[f64]) -> Result<(Vec<f64>, EvalTrace)> {
    graph.forward(params, input)
}

pub fn backward(graph: &ActiveGraph, params: &RealChromosome, batch: &[Sample<'_>]) -> Result<(f64, Gradient)> {
    graph.backward(params, batch)
}

pub fn loss_mse(pred: &[f64], target: &[f64]) -> Result<f64> {
    if pred.len() != target.len() {
        return Err(Error::LengthMismatch {
            what: "prediction/target",
            expected: target.len(),
            actual: pred.len(),
        });
    }
    if pred.is_empty() {
        return Ok(0.0);
    }
    let sum: f64 = pred.iter().zip(target).map(|(p, t)| (p - t) * (p - t)).sum();
    Ok(sum / pred.len() as f64)
}
