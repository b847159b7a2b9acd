use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{DataError, Dataset};
use crate::matrix::Matrix;

/// Held-out test rows plus `k` disjoint cross-validation folds over the rest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub test: Vec<usize>,
    pub folds: Vec<Vec<usize>>,
    pub seed: u64,
}

impl SplitPlan {
    /// Shuffles `0..n` with a ChaCha8 stream seeded by `seed`, takes the first
    /// `floor(n * test_fraction)` as test and deals the remainder round-robin
    /// into `k` folds. Index sets are returned sorted.
    pub fn new(n: usize, test_fraction: f64, k: usize, seed: u64) -> Result<Self, DataError> {
        if !(test_fraction > 0.0 && test_fraction < 1.0) {
            return Err(DataError::InvalidFraction(test_fraction));
        }
        let n_test = (n as f64 * test_fraction).floor() as usize;
        if n_test < 1 {
            return Err(DataError::InvalidFraction(test_fraction));
        }
        let available = n - n_test;
        if k == 0 || k > available {
            return Err(DataError::KTooLarge { k, available });
        }
        let mut idx: Vec<usize> = (0..n).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        idx.shuffle(&mut rng);
        let mut test = idx[..n_test].to_vec();
        test.sort_unstable();
        let mut folds = vec![Vec::with_capacity(available / k + 1); k];
        for (i, &r) in idx[n_test..].iter().enumerate() {
            folds[i % k].push(r);
        }
        for f in &mut folds {
            f.sort_unstable();
        }
        Ok(Self { test, folds, seed })
    }

    pub fn k(&self) -> usize {
        self.folds.len()
    }

    /// All non-test rows, sorted.
    pub fn train_validation_rows(&self) -> Vec<usize> {
        let mut all: Vec<usize> = self.folds.iter().flatten().copied().collect();
        all.sort_unstable();
        all
    }

    /// Rows of every fold except `fold`, sorted.
    pub fn training_rows(&self, fold: usize) -> Vec<usize> {
        let mut rows: Vec<usize> = self
            .folds
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != fold)
            .flat_map(|(_, f)| f.iter().copied())
            .collect();
        rows.sort_unstable();
        rows
    }

    pub fn validation_rows(&self, fold: usize) -> &[usize] {
        &self.folds[fold]
    }
}

pub fn split(dataset: &Dataset, test_fraction: f64, k: usize, seed: u64) -> Result<SplitPlan, DataError> {
    SplitPlan::new(dataset.len(), test_fraction, k, seed)
}

/// Per-column min/max fitted on a subset of rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitScaler {
    pub ranges: Vec<(f64, f64)>,
}

impl UnitScaler {
    pub fn fit(matrix: &Matrix, fit_rows: &[usize]) -> Self {
        assert!(!fit_rows.is_empty(), "fit_rows must be non-empty");
        let ranges = (0..matrix.cols())
            .map(|c| {
                fit_rows
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &r| {
                        let v = matrix.get(r, c);
                        (lo.min(v), hi.max(v))
                    })
            })
            .collect();
        Self { ranges }
    }

    /// `(v - min) / (max - min)` per column, no clipping; constant columns map to 0.
    pub fn transform(&self, matrix: &Matrix) -> Matrix {
        assert_eq!(matrix.cols(), self.ranges.len());
        let mut out = matrix.clone();
        for r in 0..out.rows() {
            for (v, &(lo, hi)) in out.row_mut(r).iter_mut().zip(&self.ranges) {
                *v = if hi > lo { (*v - lo) / (hi - lo) } else { 0.0 };
            }
        }
        out
    }
}

pub fn scale_unit_interval(matrix: &Matrix, fit_rows: &[usize]) -> (Matrix, Vec<(f64, f64)>) {
    let scaler = UnitScaler::fit(matrix, fit_rows);
    (scaler.transform(matrix), scaler.ranges)
}
