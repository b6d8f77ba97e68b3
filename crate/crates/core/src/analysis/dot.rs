use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::genome::Genome;
use crate::graph::ActiveGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DotMode {
    AllActive,
    SkipsOnly,
}

impl std::str::FromStr for DotMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "all" | "all-active" => Ok(DotMode::AllActive),
            "skips" | "skips-only" => Ok(DotMode::SkipsOnly),
            other => Err(format!(
                "unknown DOT mode '{other}' (expected all-active or skips-only)"
            )),
        }
    }
}

const MAX_PEN_WIDTH: f64 = 5.0;

/// Graphviz digraph of the active network. Inputs are always declared; edge
/// pen width is proportional to the absolute weight of the link.
pub fn export_dot(genome: &Genome, mode: DotMode) -> String {
    let shape = &genome.shape;
    let graph = ActiveGraph::new(genome);
    let w = &genome.params.weights;
    let max_abs = graph
        .nodes
        .iter()
        .flat_map(|n| w[n.weight_offset..n.weight_offset + n.sources.len()].iter())
        .fold(0.0f64, |m, x| m.max(x.abs()));
    let scale = if max_abs > 0.0 { MAX_PEN_WIDTH / max_abs } else { 0.0 };

    let mut out = String::new();
    out.push_str("digraph dcgpann {\n");
    out.push_str("  rankdir=LR;\n");
    out.push_str("  node [shape=circle, fontsize=10];\n");
    for i in 0..shape.n_inputs {
        let _ = writeln!(out, "  n{i} [label=\"in{i}\", shape=box, rank=0];");
    }
    for node in &graph.nodes {
        let _ = writeln!(
            out,
            "  n{} [label=\"{}\\ncol {}\", group=\"c{}\"];",
            node.id, node.kernel, node.column, node.column
        );
    }
    for node in &graph.nodes {
        for (j, &s) in node.sources.iter().enumerate() {
            let span = node.column - shape.column_of(s);
            if mode == DotMode::SkipsOnly && span < 2 {
                continue;
            }
            let weight = w[node.weight_offset + j];
            let pen = (weight.abs() * scale).max(0.05);
            let _ = writeln!(out, "  n{s} -> n{} [penwidth={pen:.4}, tooltip=\"{weight}\"];", node.id);
        }
    }
    out.push_str("}\n");
    out
}
