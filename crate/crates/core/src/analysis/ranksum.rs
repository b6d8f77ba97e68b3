//! Wilcoxon rank-sum / Mann-Whitney U test with midranks for ties.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Combined sample size up to which [`rank_sum_test`] enumerates the exact null distribution.
pub const EXACT_CUTOFF: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankSum {
    /// U statistic of the first sample.
    pub u: f64,
    pub p_two_sided: f64,
    /// One-sided p for the alternative "first sample tends to be smaller".
    pub p_less: f64,
    /// One-sided p for the alternative "first sample tends to be larger".
    pub p_greater: f64,
    pub exact: bool,
}

impl RankSum {
    fn degenerate(u: f64, exact: bool) -> Self {
        RankSum {
            u,
            p_two_sided: 1.0,
            p_less: 1.0,
            p_greater: 1.0,
            exact,
        }
    }
}

/// Twice the midrank of every value of the pooled sample, so that tied ranks
/// stay integral. Returns the doubled ranks in input order (a then b).
fn doubled_midranks(a: &[f64], b: &[f64]) -> Vec<u64> {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let mut idx: Vec<usize> = (0..pooled.len()).collect();
    idx.sort_by(|&i, &j| pooled[i].total_cmp(&pooled[j]));
    let mut ranks = vec![0u64; pooled.len()];
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && pooled[idx[end]] == pooled[idx[start]] {
            end += 1;
        }
        // positions start..end hold ranks start+1..=end
        let doubled = (start + 1 + end) as u64;
        for &i in &idx[start..end] {
            ranks[i] = doubled;
        }
        start = end;
    }
    ranks
}

fn check(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() < 3 || b.len() < 3 {
        return Err(Error::Config(format!(
            "rank-sum test needs at least 3 values per sample, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    if a.iter().chain(b).any(|x| x.is_nan()) {
        return Err(Error::Config("rank-sum test input contains NaN".into()));
    }
    Ok(())
}

fn all_identical(a: &[f64], b: &[f64]) -> bool {
    a.iter().chain(b).all(|&x| x == a[0])
}

/// Exact test: counts every way of assigning `|a|` of the pooled midranks to
/// the first sample (subset-sum dynamic programme over doubled ranks).
pub fn rank_sum_exact(a: &[f64], b: &[f64]) -> Result<RankSum> {
    check(a, b)?;
    let (na, n) = (a.len(), a.len() + b.len());
    let ranks = doubled_midranks(a, b);
    let observed: u64 = ranks[..na].iter().sum();
    let u = observed as f64 / 2.0 - (na * (na + 1)) as f64 / 2.0;
    if all_identical(a, b) {
        return Ok(RankSum::degenerate(u, true));
    }

    let max_sum: u64 = ranks.iter().sum();
    let width = max_sum as usize + 1;
    // ways[k * width + s]: subsets of size k with doubled rank sum s
    let mut ways = vec![0f64; (na + 1) * width];
    ways[0] = 1.0;
    for &r in &ranks {
        let r = r as usize;
        for k in (1..=na).rev() {
            let (lo, hi) = ways.split_at_mut(k * width);
            let prev = &lo[(k - 1) * width..];
            let cur = &mut hi[..width];
            for s in (r..width).rev() {
                cur[s] += prev[s - r];
            }
        }
    }
    let dist = &ways[na * width..];
    let total: f64 = dist.iter().sum();
    let centre = (na * (n + 1)) as i64;
    let obs_dev = (observed as i64 - centre).abs();
    let (mut two, mut less, mut greater) = (0.0, 0.0, 0.0);
    for (s, &w) in dist.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let s = s as u64;
        if (s as i64 - centre).abs() >= obs_dev {
            two += w;
        }
        if s <= observed {
            less += w;
        }
        if s >= observed {
            greater += w;
        }
    }
    Ok(RankSum {
        u,
        p_two_sided: (two / total).min(1.0),
        p_less: less / total,
        p_greater: greater / total,
        exact: true,
    })
}

/// Normal approximation with tie and continuity corrections.
pub fn rank_sum_normal(a: &[f64], b: &[f64]) -> Result<RankSum> {
    check(a, b)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let n = na + nb;
    let ranks = doubled_midranks(a, b);
    let r_a = ranks[..a.len()].iter().sum::<u64>() as f64 / 2.0;
    let u = r_a - na * (na + 1.0) / 2.0;
    if all_identical(a, b) {
        return Ok(RankSum::degenerate(u, false));
    }

    let mut sorted = ranks.clone();
    sorted.sort_unstable();
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let j = sorted[i..].iter().take_while(|&&r| r == sorted[i]).count();
        let t = j as f64;
        tie_term += t * t * t - t;
        i += j;
    }
    let mean = na * nb / 2.0;
    let var = na * nb / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if var <= 0.0 {
        return Ok(RankSum::degenerate(u, false));
    }
    let sd = var.sqrt();
    let phi = Normal::standard();
    let z_two = ((u - mean).abs() - 0.5).max(0.0) / sd;
    Ok(RankSum {
        u,
        p_two_sided: (2.0 * phi.sf(z_two)).min(1.0),
        p_less: phi.cdf((u - mean + 0.5) / sd),
        p_greater: phi.sf((u - mean - 0.5) / sd),
        exact: false,
    })
}

/// Exact when the pooled size is at most [`EXACT_CUTOFF`], normal approximation otherwise.
/// If every value in both samples is identical, all p-values are 1.
pub fn rank_sum_test(a: &[f64], b: &[f64]) -> Result<RankSum> {
    if a.len() + b.len() <= EXACT_CUTOFF {
        rank_sum_exact(a, b)
    } else {
        rank_sum_normal(a, b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separated_triplets() {
        let r = rank_sum_test(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).unwrap();
        assert_eq!(r.u, 0.0);
        assert!(r.exact);
        assert!((r.p_two_sided - 0.1).abs() < 1e-15);
        assert!((r.p_less - 0.05).abs() < 1e-15);
        assert_eq!(r.p_greater, 1.0);
    }

    #[test]
    fn identical_samples() {
        let a = [0.3, 1.2, 5.0, 2.2];
        assert_eq!(rank_sum_test(&a, &a).unwrap().p_two_sided, 1.0);
        let c = [2.0; 5];
        assert_eq!(rank_sum_test(&c, &c).unwrap().p_two_sided, 1.0);
        let big = [7.0; 20];
        assert_eq!(rank_sum_test(&big, &big).unwrap().p_two_sided, 1.0);
    }

    #[test]
    fn midranks_for_ties() {
        let r = doubled_midranks(&[1.0, 2.0, 2.0], &[4.0, 2.0]);
        assert_eq!(r, vec![2, 6, 6, 10, 6]);
    }

    #[test]
    fn too_small_is_an_error() {
        assert!(rank_sum_test(&[1.0, 2.0], &[3.0, 4.0, 5.0]).is_err());
    }

    #[test]
    fn normal_approximation_close_to_exact_for_moderate_sizes() {
        let a: Vec<f64> = (0..15).map(|i| i as f64 * 1.3).collect();
        let b: Vec<f64> = (0..15).map(|i| i as f64 * 1.1 + 4.0).collect();
        let e = rank_sum_exact(&a, &b).unwrap();
        let n = rank_sum_normal(&a, &b).unwrap();
        assert!((e.p_two_sided - n.p_two_sided).abs() < 0.01, "{e:?} {n:?}");
        assert_eq!(e.u, n.u);
    }
}
