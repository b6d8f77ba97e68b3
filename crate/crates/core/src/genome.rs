//! dCGPANN chromosome: shape, integer genes (topology), real genes (parameters).
//!
//! Node ids follow the usual CGP layout. Inputs are `0..n_inputs`, internal
//! nodes are numbered column-major after them, and the output neurons form an
//! extra last column. Columns are 1-based with the inputs being column 0, so a
//! shape with `cols = 4` has internal columns `1..=4` and output column 5.

use std::fmt;
use std::ops::Range;
use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::Kernel;

/// Kernel used by every output neuron. Not subject to mutation.
pub const OUTPUT_KERNEL: Kernel = Kernel::Sig;

pub const TEMPLATE_ROWS: usize = 10;
pub const TEMPLATE_COLS: usize = 4;
pub const TEMPLATE_LEVELS_BACK: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenomeShape {
    pub n_inputs: usize,
    pub n_outputs: usize,
    pub rows: usize,
    pub cols: usize,
    pub levels_back: usize,
    /// One arity per internal column, followed by the arity of the output column.
    pub arity: Vec<usize>,
    pub kernels: Vec<Kernel>,
}

impl GenomeShape {
    /// Shape of the template network: 4 hidden layers of 10 neurons, one
    /// output neuron, levels-back 3, all four kernels available.
    pub fn template(n_inputs: usize) -> Self {
        GenomeShape {
            n_inputs,
            n_outputs: 1,
            rows: TEMPLATE_ROWS,
            cols: TEMPLATE_COLS,
            levels_back: TEMPLATE_LEVELS_BACK,
            arity: vec![n_inputs, TEMPLATE_ROWS, TEMPLATE_ROWS, TEMPLATE_ROWS, TEMPLATE_ROWS],
            kernels: Kernel::ALL.to_vec(),
        }
    }

    pub fn check(&self) -> Result<()> {
        let fail = |m: String| Err(Error::InvalidShape(m));
        if self.n_inputs == 0 {
            return fail("n_inputs must be >= 1".into());
        }
        if self.n_outputs == 0 {
            return fail("n_outputs must be >= 1".into());
        }
        if self.rows == 0 || self.cols == 0 {
            return fail(format!("rows and cols must be >= 1 (got {}x{})", self.rows, self.cols));
        }
        if self.levels_back == 0 {
            return fail("levels_back must be >= 1".into());
        }
        if self.arity.len() != self.cols + 1 {
            return fail(format!(
                "arity needs {} entries (one per column plus the output column), got {}",
                self.cols + 1,
                self.arity.len()
            ));
        }
        if let Some(col) = self.arity.iter().position(|&a| a == 0) {
            return fail(format!("arity of column {} is zero", col + 1));
        }
        if self.kernels.is_empty() {
            return fail("kernel set is empty".into());
        }
        Ok(())
    }

    #[inline]
    pub fn n_internal(&self) -> usize {
        self.rows * self.cols
    }

    /// Internal nodes plus output neurons, i.e. everything that carries genes.
    #[inline]
    pub fn n_gene_nodes(&self) -> usize {
        self.n_internal() + self.n_outputs
    }

    #[inline]
    pub fn n_nodes(&self) -> usize {
        self.n_inputs + self.n_gene_nodes()
    }

    #[inline]
    pub fn output_column(&self) -> usize {
        self.cols + 1
    }

    /// Column of a node id (0 for inputs).
    pub fn column_of(&self, id: usize) -> usize {
        if id < self.n_inputs {
            0
        } else {
            self.column_of_gene_node(id - self.n_inputs)
        }
    }

    /// Column of the `g`-th gene-carrying node.
    #[inline]
    pub fn column_of_gene_node(&self, g: usize) -> usize {
        if g < self.n_internal() {
            g / self.rows + 1
        } else {
            self.output_column()
        }
    }

    /// Node ids contained in column `col`.
    pub fn column_ids(&self, col: usize) -> Range<usize> {
        let n = self.n_inputs;
        if col == 0 {
            0..n
        } else if col <= self.cols {
            let start = n + (col - 1) * self.rows;
            start..start + self.rows
        } else {
            let start = n + self.n_internal();
            start..start + self.n_outputs
        }
    }

    /// Legal source ids for a connection gene of a node in column `col`.
    /// Sources come from columns `max(0, col - levels_back) ..= col - 1`, which
    /// are contiguous in id space.
    pub fn source_range(&self, col: usize) -> Range<usize> {
        debug_assert!(col >= 1);
        let first = col.saturating_sub(self.levels_back);
        self.column_ids(first).start..self.column_ids(col - 1).end
    }

    #[inline]
    pub fn arity_of_gene_node(&self, g: usize) -> usize {
        self.arity[self.column_of_gene_node(g) - 1]
    }

    /// Offset of node `g`'s first connection gene (and weight).
    pub fn connection_offset(&self, g: usize) -> usize {
        let col = self.column_of_gene_node(g);
        let before: usize = self.arity[..col - 1].iter().map(|a| a * self.rows).sum();
        let within = if g < self.n_internal() {
            g % self.rows
        } else {
            g - self.n_internal()
        };
        before + within * self.arity[col - 1]
    }

    /// Total number of connection genes, which is also the number of weights.
    pub fn connection_gene_count(&self) -> usize {
        let internal: usize = self.arity[..self.cols].iter().map(|a| a * self.rows).sum();
        internal + self.arity[self.cols] * self.n_outputs
    }

    #[inline]
    pub fn output_node_id(&self, k: usize) -> usize {
        self.n_inputs + self.n_internal() + k
    }
}

/// Sum of arities over all nodes of the shape.
pub fn connection_gene_count(shape: &GenomeShape) -> usize {
    shape.connection_gene_count()
}

/// Topology part of the chromosome (`x_I`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntegerChromosome {
    /// Kernel index (into `GenomeShape::kernels`) for each internal node.
    pub function_genes: Vec<usize>,
    /// Source node ids, grouped per node in id order.
    pub connection_genes: Vec<usize>,
    pub output_genes: Vec<usize>,
}

/// Trainable part of the chromosome (`x_R`): one weight per connection gene,
/// one bias per internal node and per output neuron.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealChromosome {
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl RealChromosome {
    pub fn zeros(shape: &GenomeShape) -> Self {
        RealChromosome {
            weights: vec![0.0; shape.connection_gene_count()],
            biases: vec![0.0; shape.n_gene_nodes()],
        }
    }

    /// Standard normal weights, zero biases.
    pub fn random<R: Rng + ?Sized>(shape: &GenomeShape, rng: &mut R) -> Self {
        let weights = (0..shape.connection_gene_count())
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect();
        RealChromosome {
            weights,
            biases: vec![0.0; shape.n_gene_nodes()],
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len() + self.biases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Genome {
    pub shape: GenomeShape,
    #[serde(flatten)]
    pub topology: IntegerChromosome,
    #[serde(flatten)]
    pub params: RealChromosome,
}

impl Genome {
    /// Template network with standard normal weights and zero biases.
    pub fn template<R: Rng + ?Sized>(n_inputs: usize, rng: &mut R) -> Self {
        assert!(n_inputs >= 1, "template needs at least one input");
        Self::feed_forward(&GenomeShape::template(n_inputs), rng).expect("template shape is valid")
    }

    /// Layered network on an arbitrary shape: every node reads only the
    /// previous column, cycling through its nodes, and uses tanh when the
    /// kernel set has it. On the template shape this is the fully connected
    /// template network.
    pub fn feed_forward<R: Rng + ?Sized>(shape: &GenomeShape, rng: &mut R) -> Result<Self> {
        shape.check()?;
        let mut connection_genes = Vec::with_capacity(shape.connection_gene_count());
        for g in 0..shape.n_gene_nodes() {
            let prev = shape.column_ids(shape.column_of_gene_node(g) - 1);
            connection_genes.extend(prev.clone().cycle().take(shape.arity_of_gene_node(g)));
        }
        let kernel = shape.kernels.iter().position(|&k| k == Kernel::Tanh).unwrap_or(0);
        let topology = IntegerChromosome {
            function_genes: vec![kernel; shape.n_internal()],
            connection_genes,
            output_genes: (0..shape.n_outputs).map(|k| shape.output_node_id(k)).collect(),
        };
        let params = RealChromosome::random(shape, rng);
        Ok(Genome {
            shape: shape.clone(),
            topology,
            params,
        })
    }

    /// Every gene drawn uniformly within its legal range.
    pub fn random<R: Rng + ?Sized>(shape: &GenomeShape, rng: &mut R) -> Result<Self> {
        shape.check()?;
        let n_kernels = shape.kernels.len();
        let function_genes = (0..shape.n_internal())
            .map(|_| rng.random_range(0..n_kernels))
            .collect();
        let mut connection_genes = Vec::with_capacity(shape.connection_gene_count());
        for g in 0..shape.n_gene_nodes() {
            let range = shape.source_range(shape.column_of_gene_node(g));
            for _ in 0..shape.arity_of_gene_node(g) {
                connection_genes.push(rng.random_range(range.clone()));
            }
        }
        let topology = IntegerChromosome {
            function_genes,
            connection_genes,
            output_genes: (0..shape.n_outputs).map(|k| shape.output_node_id(k)).collect(),
        };
        let params = RealChromosome::random(shape, rng);
        Ok(Genome {
            shape: shape.clone(),
            topology,
            params,
        })
    }

    /// Kernel of a gene-carrying node.
    #[inline]
    pub fn kernel_of_gene_node(&self, g: usize) -> Kernel {
        if g < self.shape.n_internal() {
            self.shape.kernels[self.topology.function_genes[g]]
        } else {
            OUTPUT_KERNEL
        }
    }

    /// Connection genes of node `g`.
    pub fn sources_of_gene_node(&self, g: usize) -> &[usize] {
        let off = self.shape.connection_offset(g);
        &self.topology.connection_genes[off..off + self.shape.arity_of_gene_node(g)]
    }

    pub fn validate(&self) -> Vec<Violation> {
        validate(self)
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    /// Reads a genome file and rejects it unless it validates.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let genome = Self::from_json(&std::fs::read_to_string(path)?)?;
        let violations = genome.validate();
        if !violations.is_empty() {
            let msgs: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
            return Err(Error::InvalidGenome(msgs.join("; ")));
        }
        Ok(genome)
    }
}

/// A single structural problem with a genome.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Shape(String),
    LengthMismatch {
        field: &'static str,
        expected: usize,
        actual: usize,
    },
    FunctionGene {
        node: usize,
        value: usize,
        n_kernels: usize,
    },
    /// Source is in the same or a later column, or not a node at all.
    ConnectionGene {
        node: usize,
        slot: usize,
        source: usize,
    },
    /// Source lies more than `levels_back` columns before the node.
    LevelsBack {
        node: usize,
        slot: usize,
        source: usize,
        span: usize,
    },
    OutputGene {
        index: usize,
        value: usize,
        expected: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Shape(m) => write!(f, "shape: {m}"),
            Violation::LengthMismatch {
                field,
                expected,
                actual,
            } => {
                write!(f, "{field}: expected {expected} entries, found {actual}")
            }
            Violation::FunctionGene { node, value, n_kernels } => {
                write!(f, "node {node}: function gene {value} outside 0..{n_kernels}")
            }
            Violation::ConnectionGene { node, slot, source } => {
                write!(
                    f,
                    "node {node}: connection {slot} refers to {source}, which is not an earlier node"
                )
            }
            Violation::LevelsBack {
                node,
                slot,
                source,
                span,
            } => {
                write!(f, "node {node}: connection {slot} to {source} spans {span} columns")
            }
            Violation::OutputGene { index, value, expected } => {
                write!(f, "output gene {index} is {value}, expected output neuron {expected}")
            }
        }
    }
}

/// Structural check of a genome. An empty list means well-formed.
pub fn validate(genome: &Genome) -> Vec<Violation> {
    let shape = &genome.shape;
    if let Err(e) = shape.check() {
        return vec![Violation::Shape(e.to_string())];
    }
    let mut out = Vec::new();
    let mut check_len = |field: &'static str, expected: usize, actual: usize| {
        if expected != actual {
            out.push(Violation::LengthMismatch {
                field,
                expected,
                actual,
            });
            false
        } else {
            true
        }
    };
    let n_conn = shape.connection_gene_count();
    let funcs_ok = check_len(
        "function_genes",
        shape.n_internal(),
        genome.topology.function_genes.len(),
    );
    let conns_ok = check_len("connection_genes", n_conn, genome.topology.connection_genes.len());
    let outs_ok = check_len("output_genes", shape.n_outputs, genome.topology.output_genes.len());
    check_len("weights", n_conn, genome.params.weights.len());
    check_len("biases", shape.n_gene_nodes(), genome.params.biases.len());

    if funcs_ok {
        for (g, &f) in genome.topology.function_genes.iter().enumerate() {
            if f >= shape.kernels.len() {
                out.push(Violation::FunctionGene {
                    node: shape.n_inputs + g,
                    value: f,
                    n_kernels: shape.kernels.len(),
                });
            }
        }
    }
    if conns_ok {
        for g in 0..shape.n_gene_nodes() {
            let node = shape.n_inputs + g;
            let col = shape.column_of_gene_node(g);
            let legal = shape.source_range(col);
            for (slot, &source) in genome.sources_of_gene_node(g).iter().enumerate() {
                if legal.contains(&source) {
                    continue;
                }
                if source < legal.start {
                    out.push(Violation::LevelsBack {
                        node,
                        slot,
                        source,
                        span: col - shape.column_of(source),
                    });
                } else {
                    out.push(Violation::ConnectionGene { node, slot, source });
                }
            }
        }
    }
    if outs_ok {
        for (k, &o) in genome.topology.output_genes.iter().enumerate() {
            let expected = shape.output_node_id(k);
            if o != expected {
                out.push(Violation::OutputGene {
                    index: k,
                    value: o,
                    expected,
                });
            }
        }
    }
    out
}
