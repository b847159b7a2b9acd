use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{check_arity, check_training, ModelError};
use crate::matrix::{dot, Matrix};

const RIDGE: f64 = 1e-10;

/// Ordinary least squares with an intercept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearRegressionModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LinearRegressionModel {
    /// Solves the centered normal equations `(Xc'Xc + 1e-10 I) w = Xc'yc` by
    /// Cholesky; the intercept restores the means.
    pub fn fit(x: &Matrix, y: &[f64]) -> Result<Self, ModelError> {
        check_training(x, y.len())?;
        if y.iter().any(|v| !v.is_finite()) {
            return Err(ModelError::Numerical("non-finite target".into()));
        }
        let (n, d) = (x.rows(), x.cols());
        let nf = n as f64;
        let x_mean: Vec<f64> = (0..d).map(|c| x.column(c).iter().sum::<f64>() / nf).collect();
        let y_mean = y.iter().sum::<f64>() / nf;
        let xc = DMatrix::from_fn(n, d, |r, c| x.get(r, c) - x_mean[c]);
        let yc = DVector::from_iterator(n, y.iter().map(|v| v - y_mean));
        let mut gram = xc.transpose() * &xc;
        for i in 0..d {
            gram[(i, i)] += RIDGE;
        }
        let rhs = xc.transpose() * yc;
        let chol = gram
            .cholesky()
            .ok_or_else(|| ModelError::Numerical("normal equations are not positive definite".into()))?;
        let w = chol.solve(&rhs);
        let weights: Vec<f64> = w.iter().copied().collect();
        let bias = y_mean - dot(&x_mean, &weights);
        if weights.iter().any(|v| !v.is_finite()) || !bias.is_finite() {
            return Err(ModelError::Numerical("non-finite regression weights".into()));
        }
        Ok(Self { weights, bias })
    }

    pub fn predict(&self, x: &Matrix) -> Result<Vec<f64>, ModelError> {
        check_arity(x, self.weights.len())?;
        Ok(x.iter_rows().map(|r| dot(r, &self.weights) + self.bias).collect())
    }
}
