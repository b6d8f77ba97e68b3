//! Regression datasets: loading, preprocessing, splitting and a synthetic
//! Friedman #1 generator.

mod fetch;
mod tsv;

pub use fetch::{fetch_pmlb, FetchOutcome, DEFAULT_PMLB_URL};
pub use tsv::{load_tsv, write_tsv};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::Sample;

/// Scaling parameters recorded by [`preprocess`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transforms {
    pub feature_mean: Vec<f64>,
    pub feature_std: Vec<f64>,
    pub target_min: f64,
    pub target_max: f64,
}

impl Transforms {
    pub fn invert_target(&self, y: f64) -> f64 {
        self.target_min + y * (self.target_max - self.target_min)
    }
}

/// Row-major feature matrix with a single regression target.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub feature_names: Vec<String>,
    pub features: Vec<f64>,
    pub targets: Vec<f64>,
    pub transforms: Option<Transforms>,
}

impl Dataset {
    pub fn new(feature_names: Vec<String>, features: Vec<f64>, targets: Vec<f64>) -> Result<Self> {
        let width = feature_names.len();
        if width == 0 {
            return Err(Error::Data("dataset has no features".into()));
        }
        if features.len() != width * targets.len() {
            return Err(Error::Data(format!(
                "feature matrix has {} values, expected {} rows x {} features",
                features.len(),
                targets.len(),
                width
            )));
        }
        Ok(Dataset {
            feature_names,
            features,
            targets,
            transforms: None,
        })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.targets.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    #[inline]
    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        let w = self.n_features();
        &self.features[i * w..(i + 1) * w]
    }

    #[inline]
    pub fn sample(&self, i: usize) -> Sample<'_> {
        Sample {
            input: self.row(i),
            target: std::slice::from_ref(&self.targets[i]),
        }
    }

    pub fn samples(&self) -> impl Iterator<Item = Sample<'_>> + '_ {
        (0..self.len()).map(move |i| self.sample(i))
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        let w = self.n_features();
        self.features.iter().skip(j).step_by(w).copied()
    }

    /// Copy of the given rows, in the given order.
    pub fn subset(&self, rows: &[usize]) -> Dataset {
        let mut features = Vec::with_capacity(rows.len() * self.n_features());
        let mut targets = Vec::with_capacity(rows.len());
        for &r in rows {
            features.extend_from_slice(self.row(r));
            targets.push(self.targets[r]);
        }
        Dataset {
            feature_names: self.feature_names.clone(),
            features,
            targets,
            transforms: self.transforms.clone(),
        }
    }
}

/// Standardize each feature (population std) and min-max scale the target to [0, 1].
///
/// Constant features become all zeros.
pub fn preprocess(raw: &Dataset) -> Result<Dataset> {
    let n = raw.len();
    if n < 2 {
        return Err(Error::Data(format!("preprocessing needs at least 2 rows, got {n}")));
    }
    let w = raw.n_features();
    let mut mean = vec![0.0; w];
    let mut std = vec![0.0; w];
    for j in 0..w {
        let m = raw.column(j).sum::<f64>() / n as f64;
        let var = raw.column(j).map(|x| (x - m) * (x - m)).sum::<f64>() / n as f64;
        mean[j] = m;
        std[j] = var.sqrt();
        if std[j] == 0.0 {
            log::warn!("feature '{}' is constant; mapping it to zeros", raw.feature_names[j]);
        }
    }
    let (lo, hi) = raw
        .targets
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &y| {
            (lo.min(y), hi.max(y))
        });
    if hi.is_nan() || hi <= lo {
        return Err(Error::Data(format!("target is constant ({lo}); cannot min-max scale")));
    }

    let mut features = raw.features.clone();
    for row in features.chunks_exact_mut(w) {
        for j in 0..w {
            row[j] = if std[j] > 0.0 { (row[j] - mean[j]) / std[j] } else { 0.0 };
        }
    }
    let span = hi - lo;
    let targets = raw
        .targets
        .iter()
        .map(|&y| if y == hi { 1.0 } else { (y - lo) / span })
        .collect();
    Ok(Dataset {
        feature_names: raw.feature_names.clone(),
        features,
        targets,
        transforms: Some(Transforms {
            feature_mean: mean,
            feature_std: std,
            target_min: lo,
            target_max: hi,
        }),
    })
}

/// Train/test partition of a dataset.
#[derive(Debug, Clone)]
pub struct SplitDataset {
    pub train: Dataset,
    pub test: Dataset,
    pub train_rows: Vec<usize>,
    pub test_rows: Vec<usize>,
    pub seed: u64,
    pub ratio: f64,
}

/// Random permutation by seed; the first `round(ratio * n)` rows go to training.
pub fn split(data: &Dataset, ratio: f64, seed: u64) -> Result<SplitDataset> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::Config(format!("split ratio must be in (0, 1), got {ratio}")));
    }
    let mut perm: Vec<usize> = (0..data.len()).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_train = (ratio * data.len() as f64).round() as usize;
    let test_rows = perm.split_off(n_train);
    Ok(SplitDataset {
        train: data.subset(&perm),
        test: data.subset(&test_rows),
        train_rows: perm,
        test_rows,
        seed,
        ratio,
    })
}

/// Closed form of the Friedman #1 response without noise.
pub fn friedman1_response(x: &[f64]) -> f64 {
    10.0 * (std::f64::consts::PI * x[0] * x[1]).sin() + 20.0 * (x[2] - 0.5).powi(2) + 10.0 * x[3] + 5.0 * x[4]
}

/// Friedman #1 regression problem: 10 uniform features on [0, 1], of which
/// only the first five influence the target.
pub fn friedman1(n_samples: usize, noise_std: f64, seed: u64) -> Result<Dataset> {
    if n_samples == 0 {
        return Err(Error::Config("friedman1 needs at least one sample".into()));
    }
    let noise =
        Normal::new(0.0, noise_std).map_err(|e| Error::Config(format!("invalid noise std {noise_std}: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut features = Vec::with_capacity(n_samples * 10);
    let mut targets = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        let start = features.len();
        for _ in 0..10 {
            features.push(rng.random::<f64>());
        }
        let eps = if noise_std > 0.0 { noise.sample(&mut rng) } else { 0.0 };
        targets.push(friedman1_response(&features[start..]) + eps);
    }
    let names = (1..=10).map(|i| format!("x{i}")).collect();
    Dataset::new(names, features, targets)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(features: Vec<f64>, targets: Vec<f64>) -> Dataset {
        let w = features.len() / targets.len();
        Dataset::new((0..w).map(|i| format!("f{i}")).collect(), features, targets).unwrap()
    }

    #[test]
    fn standardizes_with_population_std() {
        let d = preprocess(&tiny(vec![1.0, 2.0, 3.0], vec![2.0, 4.0, 6.0])).unwrap();
        // population std of {1,2,3} is sqrt(2/3)
        let z = 1.0 / (2.0f64 / 3.0).sqrt();
        assert!((d.features[0] + z).abs() < 1e-12);
        assert_eq!(d.features[1], 0.0);
        assert!((d.features[2] - z).abs() < 1e-12);
        assert!((z - 1.224745).abs() < 1e-6);
        assert_eq!(d.targets, vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn preprocess_is_idempotent_on_target() {
        let d = preprocess(&tiny(vec![1.0, 5.0, 3.0, 8.0], vec![3.0, -1.0, 7.0, 2.0])).unwrap();
        let dd = preprocess(&d).unwrap();
        assert_eq!(d.targets, dd.targets);
    }

    #[test]
    fn constant_feature_maps_to_zero_and_constant_target_fails() {
        let d = preprocess(&tiny(vec![4.0, 1.0, 4.0, 2.0, 4.0, 3.0], vec![1.0, 2.0, 3.0])).unwrap();
        assert_eq!(d.column(0).collect::<Vec<_>>(), vec![0.0, 0.0, 0.0]);
        assert!(preprocess(&tiny(vec![1.0, 2.0], vec![3.0, 3.0])).is_err());
        assert!(preprocess(&tiny(vec![1.0], vec![3.0])).is_err());
    }

    #[test]
    fn split_sizes_and_determinism() {
        let d = friedman1(100, 0.0, 1).unwrap();
        let s = split(&d, 0.75, 9).unwrap();
        assert_eq!((s.train.len(), s.test.len()), (75, 25));
        let again = split(&d, 0.75, 9).unwrap();
        assert_eq!(s.train_rows, again.train_rows);
        let mut all: Vec<usize> = s.train_rows.iter().chain(&s.test_rows).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..100).collect::<Vec<_>>());
        assert!(split(&d, 1.0, 0).is_err());
    }

    #[test]
    fn friedman_closed_form_points() {
        assert!((friedman1_response(&[0.5; 10]) - 14.571068).abs() < 1e-6);
        assert_eq!(friedman1_response(&[0.0; 10]), 5.0);
    }

    #[test]
    fn friedman_is_seeded() {
        let a = friedman1(50, 1.0, 3).unwrap();
        let b = friedman1(50, 1.0, 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.n_features(), 10);
        assert!(a.features.iter().all(|&x| (0.0..1.0).contains(&x)));
        let clean = friedman1(20, 0.0, 3).unwrap();
        for i in 0..clean.len() {
            assert_eq!(clean.targets[i], friedman1_response(clean.row(i)));
        }
    }
}
