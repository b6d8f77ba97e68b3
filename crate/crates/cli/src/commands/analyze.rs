use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use dcgpann::{activation_histogram, export_dot, topology_stats, DotMode, Genome, Kernel, TopologyStats};

use crate::CliError;

#[derive(Debug, Clone)]
pub struct AnalyzeReport {
    pub stats: TopologyStats,
    pub activations: BTreeMap<Kernel, usize>,
    pub dot_path: PathBuf,
}

impl AnalyzeReport {
    pub fn render(&self) -> String {
        let s = &self.stats;
        let mut out = String::new();
        let _ = writeln!(out, "total_weights: {}", s.total_weights);
        let _ = writeln!(out, "active_weights: {}", s.active_weights);
        let _ = writeln!(out, "skip_connections: {}", s.skip_connections);
        let _ = writeln!(out, "duplicate_connections: {}", s.duplicate_connections);
        let _ = writeln!(out, "compression_ratio: {:.6}", s.compression_ratio);
        let hist: Vec<String> = self.activations.iter().map(|(k, n)| format!("{k}={n}")).collect();
        let _ = writeln!(out, "activations: {}", hist.join(" "));
        let _ = writeln!(out, "dot: {}", self.dot_path.display());
        out
    }
}

/// Topology statistics and activation histogram of a saved genome; writes
/// `<stem>.dot` (all active links) or `<stem>.skips.dot` into `out_dir`.
pub fn analyze(genome_path: &Path, mode: DotMode, out_dir: &Path) -> Result<AnalyzeReport, CliError> {
    let genome = Genome::load(genome_path)?;
    let stem = genome_path.file_stem().and_then(|s| s.to_str()).unwrap_or("genome");
    let name = match mode {
        DotMode::AllActive => format!("{stem}.dot"),
        DotMode::SkipsOnly => format!("{stem}.skips.dot"),
    };
    std::fs::create_dir_all(out_dir).map_err(CliError::io(format!("creating {}", out_dir.display())))?;
    let dot_path = out_dir.join(name);
    std::fs::write(&dot_path, export_dot(&genome, mode))
        .map_err(CliError::io(format!("writing {}", dot_path.display())))?;
    Ok(AnalyzeReport {
        stats: topology_stats(&genome),
        activations: activation_histogram(&genome),
        dot_path,
    })
}
