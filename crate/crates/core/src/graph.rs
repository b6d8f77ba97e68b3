use crate::genome::Genome;
use crate::kernel::Kernel;

/// One active gene-carrying node with its inputs resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct ActiveNode {
    pub id: usize,
    pub column: usize,
    pub kernel: Kernel,
    /// Source node ids, one per connection gene.
    pub sources: Vec<usize>,
    /// Source positions in the evaluation buffer (see [`ActiveGraph`]).
    pub source_slots: Vec<usize>,
    /// Index of the node's first weight in `RealChromosome::weights`.
    pub weight_offset: usize,
    pub bias_index: usize,
}

/// Evaluable view of a genome: the nodes backward-reachable from the output
/// genes, in an order where every node follows all of its sources.
///
/// Values live in a buffer with one slot per input followed by one slot per
/// active node, so `slot = n_inputs + position in nodes`.
#[derive(Debug, Clone, PartialEq)]
pub struct ActiveGraph {
    pub n_inputs: usize,
    pub nodes: Vec<ActiveNode>,
    pub output_slots: Vec<usize>,
    pub n_weights: usize,
    pub n_biases: usize,
}

impl ActiveGraph {
    pub fn new(genome: &Genome) -> Self {
        let shape = &genome.shape;
        let n = shape.n_inputs;
        let mut active = vec![false; shape.n_nodes()];
        for &o in &genome.topology.output_genes {
            active[o] = true;
        }
        // ids are column-major, so a single descending sweep suffices
        for g in (0..shape.n_gene_nodes()).rev() {
            if active[n + g] {
                for &s in genome.sources_of_gene_node(g) {
                    active[s] = true;
                }
            }
        }

        let mut slot_of = vec![usize::MAX; shape.n_nodes()];
        for (i, slot) in slot_of.iter_mut().enumerate().take(n) {
            *slot = i;
        }
        let mut nodes = Vec::new();
        for g in 0..shape.n_gene_nodes() {
            let id = n + g;
            if !active[id] {
                continue;
            }
            slot_of[id] = n + nodes.len();
            let sources = genome.sources_of_gene_node(g).to_vec();
            let source_slots = sources.iter().map(|&s| slot_of[s]).collect();
            nodes.push(ActiveNode {
                id,
                column: shape.column_of_gene_node(g),
                kernel: genome.kernel_of_gene_node(g),
                sources,
                source_slots,
                weight_offset: shape.connection_offset(g),
                bias_index: g,
            });
        }
        let output_slots = genome.topology.output_genes.iter().map(|&o| slot_of[o]).collect();
        ActiveGraph {
            n_inputs: n,
            nodes,
            output_slots,
            n_weights: shape.connection_gene_count(),
            n_biases: shape.n_gene_nodes(),
        }
    }

    /// Size of the value buffer needed for evaluation.
    #[inline]
    pub fn n_slots(&self) -> usize {
        self.n_inputs + self.nodes.len()
    }

    /// Inputs first, then active nodes in evaluation order.
    pub fn order(&self) -> Vec<usize> {
        (0..self.n_inputs).chain(self.nodes.iter().map(|n| n.id)).collect()
    }

    pub fn is_active(&self, id: usize) -> bool {
        id < self.n_inputs || self.nodes.binary_search_by_key(&id, |n| n.id).is_ok()
    }

    pub fn active_weight_count(&self) -> usize {
        self.nodes.iter().map(|n| n.sources.len()).sum()
    }

    /// Mask over `RealChromosome::weights` marking weights of active nodes.
    pub fn weight_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.n_weights];
        for node in &self.nodes {
            mask[node.weight_offset..node.weight_offset + node.sources.len()].fill(true);
        }
        mask
    }

    pub fn bias_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.n_biases];
        for node in &self.nodes {
            mask[node.bias_index] = true;
        }
        mask
    }

    /// Checks the evaluable-order property in one pass.
    pub fn is_topologically_ordered(&self) -> bool {
        self.nodes
            .iter()
            .enumerate()
            .all(|(k, node)| node.source_slots.iter().all(|&s| s < self.n_inputs + k))
    }
}

pub fn active_graph(genome: &Genome) -> ActiveGraph {
    ActiveGraph::new(genome)
}
