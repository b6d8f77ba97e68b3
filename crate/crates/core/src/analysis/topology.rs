use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::genome::Genome;
use crate::graph::ActiveGraph;
use crate::kernel::Kernel;

/// Connection accounting of one genome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologyStats {
    pub total_weights: usize,
    pub active_weights: usize,
    pub skip_connections: usize,
    pub duplicate_connections: usize,
    pub compression_ratio: f64,
}

/// Fraction of the weight storage still needed once inactive and duplicate
/// links are dropped.
pub fn compression_ratio(total: usize, active: usize, duplicates: usize) -> f64 {
    (active - duplicates) as f64 / total as f64
}

pub fn topology_stats(genome: &Genome) -> TopologyStats {
    let shape = &genome.shape;
    let graph = ActiveGraph::new(genome);
    let total_weights = shape.connection_gene_count();
    let mut active_weights = 0;
    let mut skip_connections = 0;
    let mut duplicate_connections = 0;
    let mut multiplicity: HashMap<usize, usize> = HashMap::new();
    for node in &graph.nodes {
        active_weights += node.sources.len();
        skip_connections += node
            .sources
            .iter()
            .filter(|&&s| shape.column_of(s) + 2 <= node.column)
            .count();
        multiplicity.clear();
        for &s in &node.sources {
            *multiplicity.entry(s).or_default() += 1;
        }
        duplicate_connections += multiplicity.values().map(|m| m - 1).sum::<usize>();
    }
    TopologyStats {
        total_weights,
        active_weights,
        skip_connections,
        duplicate_connections,
        compression_ratio: compression_ratio(total_weights, active_weights, duplicate_connections),
    }
}

/// Kernel counts over active hidden nodes (output neurons excluded).
/// Kernels with no active node are absent from the map.
pub fn activation_histogram(genome: &Genome) -> BTreeMap<Kernel, usize> {
    let graph = ActiveGraph::new(genome);
    let mut hist = BTreeMap::new();
    for node in graph.nodes.iter().filter(|n| n.column <= genome.shape.cols) {
        *hist.entry(node.kernel).or_default() += 1;
    }
    hist
}
