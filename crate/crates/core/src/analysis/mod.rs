//! Topology accounting, kernel histograms, rank-sum testing and DOT export.

mod dot;
mod ranksum;
mod topology;

pub use dot::{export_dot, DotMode};
pub use ranksum::{rank_sum_exact, rank_sum_normal, rank_sum_test, RankSum, EXACT_CUTOFF};
pub use topology::{activation_histogram, compression_ratio, topology_stats, TopologyStats};
