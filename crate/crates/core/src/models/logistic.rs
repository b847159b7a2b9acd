use serde::{Deserialize, Serialize};

use super::{check_arity, check_labels, check_training, sigmoid, ModelError};
use crate::matrix::{dot, Matrix};

/// L2-regularized logistic regression trained by full-batch gradient descent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticConfig {
    pub lambda: f64,
    pub max_iters: usize,
    /// Stop once the gradient norm falls below this.
    pub grad_tol: f64,
    /// First trial step; later trials use the Barzilai-Borwein step.
    pub initial_step: f64,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        Self {
            lambda: 0.5,
            max_iters: 10_000,
            grad_tol: 1e-8,
            initial_step: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub lambda: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// `sum_i [log(1 + e^{z_i}) - y_i z_i] + lambda * |w|^2` with `z = w.x + b`.
pub fn objective(x: &Matrix, y: &[usize], w: &[f64], b: f64, lambda: f64) -> f64 {
    let nll: f64 = x
        .iter_rows()
        .zip(y)
        .map(|(row, &yi)| {
            let z = dot(row, w) + b;
            softplus(z) - yi as f64 * z
        })
        .sum();
    nll + lambda * dot(w, w)
}

/// Gradient of [`objective`]: `(d/dw, d/db)`.
pub fn gradient(x: &Matrix, y: &[usize], w: &[f64], b: f64, lambda: f64) -> (Vec<f64>, f64) {
    let mut gw: Vec<f64> = w.iter().map(|wi| 2.0 * lambda * wi).collect();
    let mut gb = 0.0;
    for (row, &yi) in x.iter_rows().zip(y) {
        let r = sigmoid(dot(row, w) + b) - yi as f64;
        for (g, v) in gw.iter_mut().zip(row) {
            *g += r * v;
        }
        gb += r;
    }
    (gw, gb)
}

fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

/// `objective(w + dw, b + db) - objective(w, b)` without differencing two
/// large sums, so it stays accurate when the change is far below their rounding.
pub fn objective_change(x: &Matrix, y: &[usize], w: &[f64], b: f64, dw: &[f64], db: f64, lambda: f64) -> f64 {
    let nll: f64 = x
        .iter_rows()
        .zip(y)
        .map(|(row, &yi)| {
            let z = dot(row, w) + b;
            let d = dot(row, dw) + db;
            let soft = if d.abs() < 1.0 {
                (sigmoid(z) * d.exp_m1()).ln_1p()
            } else {
                softplus(z + d) - softplus(z)
            };
            soft - yi as f64 * d
        })
        .sum();
    let reg: f64 = w.iter().zip(dw).map(|(wi, di)| di * (2.0 * wi + di)).sum();
    nll + lambda * reg
}

impl LogisticModel {
    pub fn fit(x: &Matrix, y: &[usize], config: &LogisticConfig) -> Result<Self, ModelError> {
        Self::fit_traced(x, y, config).map(|(m, _)| m)
    }

    /// Trains and returns the objective value after every accepted step.
    ///
    /// Each iteration backtracks (halving) from the trial step until the
    /// Armijo condition holds on [`objective_change`], so the objective never
    /// increases. Trace entries accumulate those changes from the starting value.
    pub fn fit_traced(x: &Matrix, y: &[usize], config: &LogisticConfig) -> Result<(Self, Vec<f64>), ModelError> {
        check_training(x, y.len())?;
        check_labels(y)?;
        if !(config.lambda >= 0.0) {
            return Err(ModelError::InvalidParameter("lambda must be non-negative".into()));
        }
        let d = x.cols();
        let lambda = config.lambda;
        let mut theta = vec![0.0; d + 1];
        let grad = |t: &[f64]| {
            let (mut g, gb) = gradient(x, y, &t[..d], t[d], lambda);
            g.push(gb);
            g
        };
        let mut fx = objective(x, y, &theta[..d], theta[d], lambda);
        let mut g = grad(&theta);
        let mut trace = vec![fx];
        let mut step = config.initial_step;
        let mut converged = false;
        let mut iterations = 0;
        while iterations < config.max_iters {
            let gnorm2 = dot(&g, &g);
            if gnorm2.sqrt() < config.grad_tol {
                converged = true;
                break;
            }
            iterations += 1;
            let mut t = step;
            let (next, f_next, g_next) = loop {
                let cand: Vec<f64> = theta.iter().zip(&g).map(|(a, b)| a - t * b).collect();
                let delta: Vec<f64> = cand.iter().zip(&theta).map(|(c, a)| c - a).collect();
                let change = objective_change(x, y, &theta[..d], theta[d], &delta[..d], delta[d], lambda);
                if change <= -1e-4 * t * gnorm2 {
                    let gc = grad(&cand);
                    break (cand, fx + change, gc);
                }
                t *= 0.5;
                if t < step * 1e-18 {
                    return Ok((self_from(theta, lambda, iterations, false, d), trace));
                }
            };
            let s: Vec<f64> = next.iter().zip(&theta).map(|(a, b)| a - b).collect();
            let yv: Vec<f64> = g_next.iter().zip(&g).map(|(a, b)| a - b).collect();
            let sy = dot(&s, &yv);
            step = if sy > 0.0 {
                dot(&s, &s) / sy
            } else {
                config.initial_step
            };
            theta = next;
            g = g_next;
            fx = f_next;
            trace.push(fx);
        }
        if !converged {
            converged = dot(&g, &g).sqrt() < config.grad_tol;
        }
        if theta.iter().any(|v| !v.is_finite()) {
            return Err(ModelError::Numerical("logistic weights diverged".into()));
        }
        Ok((self_from(theta, lambda, iterations, converged, d), trace))
    }

    pub fn decision(&self, x: &Matrix) -> Result<Vec<f64>, ModelError> {
        check_arity(x, self.weights.len())?;
        Ok(x.iter_rows().map(|r| dot(r, &self.weights) + self.bias).collect())
    }

    pub fn predict_proba(&self, x: &Matrix) -> Result<Vec<f64>, ModelError> {
        Ok(self.decision(x)?.into_iter().map(sigmoid).collect())
    }

    pub fn predict(&self, x: &Matrix) -> Result<Vec<usize>, ModelError> {
        Ok(self
            .predict_proba(x)?
            .into_iter()
            .map(|p| usize::from(p >= 0.5))
            .collect())
    }
}

fn self_from(theta: Vec<f64>, lambda: f64, iterations: usize, converged: bool, d: usize) -> LogisticModel {
    LogisticModel {
        weights: theta[..d].to_vec(),
        bias: theta[d],
        lambda,
        iterations,
        converged,
    }
}
