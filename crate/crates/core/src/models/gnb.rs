use serde::{Deserialize, Serialize};

use super::{check_arity, check_labels, check_training, ModelError};
use crate::matrix::Matrix;
use crate::spn::log_sum_exp;

pub const VARIANCE_FLOOR: f64 = 1e-9;

/// Gaussian naive Bayes over two classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GnbModel {
    pub priors: [f64; 2],
    pub means: [Vec<f64>; 2],
    /// Population variances, floored at [`VARIANCE_FLOOR`].
    pub variances: [Vec<f64>; 2],
}

impl GnbModel {
    pub fn fit(x: &Matrix, y: &[usize]) -> Result<Self, ModelError> {
        check_training(x, y.len())?;
        check_labels(y)?;
        let d = x.cols();
        let mut counts = [0.0f64; 2];
        let mut means = [vec![0.0; d], vec![0.0; d]];
        for (row, &c) in x.iter_rows().zip(y) {
            counts[c] += 1.0;
            for (m, v) in means[c].iter_mut().zip(row) {
                *m += v;
            }
        }
        for c in 0..2 {
            if counts[c] == 0.0 {
                return Err(ModelError::MissingClass(c));
            }
            means[c].iter_mut().for_each(|m| *m /= counts[c]);
        }
        let mut variances = [vec![0.0; d], vec![0.0; d]];
        for (row, &c) in x.iter_rows().zip(y) {
            for ((s, v), m) in variances[c].iter_mut().zip(row).zip(&means[c]) {
                *s += (v - m) * (v - m);
            }
        }
        for c in 0..2 {
            variances[c]
                .iter_mut()
                .for_each(|s| *s = (*s / counts[c]).max(VARIANCE_FLOOR));
        }
        let n = counts[0] + counts[1];
        Ok(Self {
            priors: [counts[0] / n, counts[1] / n],
            means,
            variances,
        })
    }

    fn log_joint(&self, row: &[f64], c: usize) -> f64 {
        let ll: f64 = row
            .iter()
            .zip(&self.means[c])
            .zip(&self.variances[c])
            .map(|((v, m), s)| -0.5 * (2.0 * std::f64::consts::PI * s).ln() - (v - m) * (v - m) / (2.0 * s))
            .sum();
        self.priors[c].ln() + ll
    }

    /// Class posteriors `[P(0|x), P(1|x)]` per row.
    pub fn posteriors(&self, x: &Matrix) -> Result<Vec<[f64; 2]>, ModelError> {
        check_arity(x, self.means[0].len())?;
        Ok(x.iter_rows()
            .map(|row| {
                let l = [self.log_joint(row, 0), self.log_joint(row, 1)];
                let z = log_sum_exp(l.iter().copied());
                [(l[0] - z).exp(), (l[1] - z).exp()]
            })
            .collect())
    }

    pub fn predict_proba(&self, x: &Matrix) -> Result<Vec<f64>, ModelError> {
        Ok(self.posteriors(x)?.into_iter().map(|p| p[1]).collect())
    }

    pub fn predict(&self, x: &Matrix) -> Result<Vec<usize>, ModelError> {
        Ok(self
            .posteriors(x)?
            .into_iter()
            .map(|p| usize::from(p[1] > p[0]))
            .collect())
    }
}
