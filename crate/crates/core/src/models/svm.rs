use serde::{Deserialize, Serialize};

use super::{check_arity, check_labels, check_training, sigmoid, ModelError};
use crate::matrix::Matrix;

const TAU: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmConfig {
    pub c: f64,
    pub gamma: f64,
    /// Stop when the maximal KKT violation is at most this.
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for SvmConfig {
    fn default() -> Self {
        Self {
            c: 1.0,
            gamma: 0.1,
            tol: 1e-3,
            max_iters: 1_000_000,
        }
    }
}

/// Soft-margin RBF-kernel SVM with a logistic calibration of its decision value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub support_vectors: Matrix,
    /// `alpha_i * y_i` per support vector.
    pub coefficients: Vec<f64>,
    pub bias: f64,
    pub gamma: f64,
    pub c: f64,
    /// Platt parameters: `P(y=1 | f) = 1 / (1 + exp(a f + b))`.
    pub platt_a: f64,
    pub platt_b: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn rbf(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-gamma * d2).exp()
}

/// Dual solution of the SMO solver.
#[derive(Debug, Clone)]
pub struct DualSolution {
    pub alpha: Vec<f64>,
    pub bias: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Final maximal KKT violation `m(alpha) - M(alpha)`.
    pub violation: f64,
}

/// SMO with second-order working-set selection on a precomputed kernel.
/// `y` holds `-1.0` / `+1.0`.
pub fn solve_dual(kernel: &[Vec<f64>], y: &[f64], c: f64, tol: f64, max_iters: usize) -> DualSolution {
    let n = y.len();
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let q = |i: usize, j: usize| y[i] * y[j] * kernel[i][j];
    let is_upper = |a: f64| a >= c;
    let is_lower = |a: f64| a <= 0.0;
    let mut iterations = 0;
    let mut converged = false;
    let mut violation = f64::INFINITY;
    while iterations < max_iters {
        // i: maximal violating index in I_up
        let mut gmax = f64::NEG_INFINITY;
        let mut gmax_idx = None;
        for t in 0..n {
            if y[t] > 0.0 {
                if !is_upper(alpha[t]) && -grad[t] >= gmax {
                    gmax = -grad[t];
                    gmax_idx = Some(t);
                }
            } else if !is_lower(alpha[t]) && grad[t] >= gmax {
                gmax = grad[t];
                gmax_idx = Some(t);
            }
        }
        let mut gmax2 = f64::NEG_INFINITY;
        let mut gmin_idx = None;
        let mut obj_min = f64::INFINITY;
        if let Some(i) = gmax_idx {
            for j in 0..n {
                if y[j] > 0.0 {
                    if !is_lower(alpha[j]) {
                        let diff = gmax + grad[j];
                        gmax2 = gmax2.max(grad[j]);
                        if diff > 0.0 {
                            let quad = kernel[i][i] + kernel[j][j] - 2.0 * y[i] * q(i, j);
                            let obj = -(diff * diff) / if quad > 0.0 { quad } else { TAU };
                            if obj <= obj_min {
                                gmin_idx = Some(j);
                                obj_min = obj;
                            }
                        }
                    }
                } else if !is_upper(alpha[j]) {
                    let diff = gmax - grad[j];
                    gmax2 = gmax2.max(-grad[j]);
                    if diff > 0.0 {
                        let quad = kernel[i][i] + kernel[j][j] + 2.0 * y[i] * q(i, j);
                        let obj = -(diff * diff) / if quad > 0.0 { quad } else { TAU };
                        if obj <= obj_min {
                            gmin_idx = Some(j);
                            obj_min = obj;
                        }
                    }
                }
            }
        }
        violation = gmax + gmax2;
        let (i, j) = match (gmax_idx, gmin_idx) {
            (Some(i), Some(j)) if violation >= tol => (i, j),
            _ => {
                converged = true;
                break;
            }
        };
        iterations += 1;
        let (old_i, old_j) = (alpha[i], alpha[j]);
        if y[i] != y[j] {
            let quad = kernel[i][i] + kernel[j][j] + 2.0 * q(i, j);
            let quad = if quad > 0.0 { quad } else { TAU };
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let quad = kernel[i][i] + kernel[j][j] - 2.0 * q(i, j);
            let quad = if quad > 0.0 { quad } else { TAU };
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for (k, g) in grad.iter_mut().enumerate() {
            *g += q(i, k) * di + q(j, k) * dj;
        }
    }
    // Bias from free vectors, or the midpoint of the feasible interval.
    let (mut ub, mut lb, mut sum_free, mut n_free) = (f64::INFINITY, f64::NEG_INFINITY, 0.0, 0usize);
    for t in 0..n {
        let yg = y[t] * grad[t];
        if is_upper(alpha[t]) {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if is_lower(alpha[t]) {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            n_free += 1;
            sum_free += yg;
        }
    }
    let rho = if n_free > 0 {
        sum_free / n_free as f64
    } else {
        (ub + lb) / 2.0
    };
    DualSolution {
        alpha,
        bias: -rho,
        iterations,
        converged,
        violation,
    }
}

/// Platt scaling fitted by Newton's method with backtracking.
pub fn fit_platt(decisions: &[f64], labels: &[usize]) -> (f64, f64) {
    let n_pos = labels.iter().filter(|&&l| l == 1).count() as f64;
    let n_neg = labels.len() as f64 - n_pos;
    let hi = (n_pos + 1.0) / (n_pos + 2.0);
    let lo = 1.0 / (n_neg + 2.0);
    let t: Vec<f64> = labels.iter().map(|&l| if l == 1 { hi } else { lo }).collect();
    let mut a = 0.0;
    let mut b = ((n_neg + 1.0) / (n_pos + 1.0)).ln();
    let fval = |a: f64, b: f64| -> f64 {
        decisions
            .iter()
            .zip(&t)
            .map(|(&f, &ti)| {
                let z = f * a + b;
                if z >= 0.0 {
                    ti * z + (-z).exp().ln_1p()
                } else {
                    (ti - 1.0) * z + z.exp().ln_1p()
                }
            })
            .sum()
    };
    let mut fv = fval(a, b);
    for _ in 0..100 {
        let (mut h11, mut h22, mut h21, mut g1, mut g2) = (1e-12, 1e-12, 0.0, 0.0, 0.0);
        for (&f, &ti) in decisions.iter().zip(&t) {
            let z = f * a + b;
            let (p, q) = if z >= 0.0 {
                let e = (-z).exp();
                (e / (1.0 + e), 1.0 / (1.0 + e))
            } else {
                let e = z.exp();
                (1.0 / (1.0 + e), e / (1.0 + e))
            };
            let d2 = p * q;
            h11 += f * f * d2;
            h22 += d2;
            h21 += f * d2;
            let d1 = ti - p;
            g1 += f * d1;
            g2 += d1;
        }
        if g1.abs() < 1e-5 && g2.abs() < 1e-5 {
            break;
        }
        let det = h11 * h22 - h21 * h21;
        let da = -(h22 * g1 - h21 * g2) / det;
        let db = -(-h21 * g1 + h11 * g2) / det;
        let gd = g1 * da + g2 * db;
        let mut step = 1.0;
        while step >= 1e-10 {
            let (na, nb) = (a + step * da, b + step * db);
            let nf = fval(na, nb);
            if nf < fv + 1e-4 * step * gd {
                a = na;
                b = nb;
                fv = nf;
                break;
            }
            step /= 2.0;
        }
        if step < 1e-10 {
            break;
        }
    }
    (a, b)
}

impl SvmModel {
    pub fn fit(x: &Matrix, y: &[usize], config: &SvmConfig) -> Result<Self, ModelError> {
        check_training(x, y.len())?;
        check_labels(y)?;
        if !(config.c > 0.0) || !(config.gamma > 0.0) || !(config.tol > 0.0) {
            return Err(ModelError::InvalidParameter("C, gamma and tol must be positive".into()));
        }
        for c in 0..2 {
            if !y.contains(&c) {
                return Err(ModelError::MissingClass(c));
            }
        }
        let n = x.rows();
        let kernel: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| rbf(x.row(i), x.row(j), config.gamma)).collect())
            .collect();
        let ys: Vec<f64> = y.iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect();
        let sol = solve_dual(&kernel, &ys, config.c, config.tol, config.max_iters);
        let support: Vec<usize> = (0..n).filter(|&i| sol.alpha[i] > 0.0).collect();
        let coefficients: Vec<f64> = support.iter().map(|&i| sol.alpha[i] * ys[i]).collect();
        let decisions: Vec<f64> = (0..n)
            .map(|r| {
                support
                    .iter()
                    .zip(&coefficients)
                    .map(|(&i, a)| a * kernel[i][r])
                    .sum::<f64>()
                    + sol.bias
            })
            .collect();
        let (platt_a, platt_b) = fit_platt(&decisions, y);
        Ok(Self {
            support_vectors: x.select_rows(&support),
            coefficients,
            bias: sol.bias,
            gamma: config.gamma,
            c: config.c,
            platt_a,
            platt_b,
            iterations: sol.iterations,
            converged: sol.converged,
        })
    }

    /// `sum_i alpha_i y_i K(x_i, x) + b` per row.
    pub fn decision_function(&self, x: &Matrix) -> Result<Vec<f64>, ModelError> {
        check_arity(x, self.support_vectors.cols())?;
        Ok(x.iter_rows()
            .map(|row| {
                self.support_vectors
                    .iter_rows()
                    .zip(&self.coefficients)
                    .map(|(sv, a)| a * rbf(sv, row, self.gamma))
                    .sum::<f64>()
                    + self.bias
            })
            .collect())
    }

    pub fn predict(&self, x: &Matrix) -> Result<Vec<usize>, ModelError> {
        Ok(self
            .decision_function(x)?
            .into_iter()
            .map(|f| usize::from(f > 0.0))
            .collect())
    }

    /// Calibrated probability of class 1.
    pub fn predict_proba(&self, x: &Matrix) -> Result<Vec<f64>, ModelError> {
        Ok(self
            .decision_function(x)?
            .into_iter()
            .map(|f| sigmoid(-(self.platt_a * f + self.platt_b)))
            .collect())
    }
}
