//! Differentiable Cartesian genetic programming for neural architecture search.
//!
//! A [`Genome`] encodes a network as integer genes (kernels and connections on a
//! node grid) plus real genes (one weight per connection, one bias per node).
//! [`ActiveGraph`] is the evaluable view used for forward passes and
//! reverse-mode gradients, [`trainer`] runs mini-batch SGD on the real genes, and
//! [`evolution`] implements the Learn/Select/Mutate/Forget memetic loop that
//! evolves the integer genes.

pub mod analysis;
pub mod data;
pub mod error;
pub mod eval;
pub mod evolution;
pub mod genome;
pub mod graph;
pub mod kernel;
pub mod rng;
pub mod trainer;

pub use analysis::{activation_histogram, export_dot, rank_sum_test, topology_stats, DotMode, RankSum, TopologyStats};
pub use data::{friedman1, load_tsv, preprocess, split, Dataset, SplitDataset};
pub use error::{Error, Result};
pub use eval::{backward, forward, loss_mse, EvalTrace, Gradient, Sample};
pub use evolution::{
    mutate, random_baseline, run_lsmf, BaselineSummary, CycleLog, IterationResult, LsmfConfig, MutationSummary,
};
pub use genome::{connection_gene_count, validate, Genome, GenomeShape, IntegerChromosome, RealChromosome, Violation};
pub use graph::{active_graph, ActiveGraph, ActiveNode};
pub use kernel::Kernel;
pub use trainer::{evaluate, sgd_epoch, train, TrainConfig, TrainHistory};
