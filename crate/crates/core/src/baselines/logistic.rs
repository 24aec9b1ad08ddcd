//! L2-regularized logistic regression fitted by gradient descent.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signals::Condition;

/// Linear log-odds model; the score is a sigmoid probability of faulty.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

/// `ln(1 + exp(z))` without overflow for large `|z|`.
fn ln1pexp(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Numerically stable logistic function.
fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Regularized negative log-likelihood and its gradient.
///
/// `targets` are 0 (healthy) or 1 (faulty). The objective is
/// `sum_i [ln(1 + exp(z_i)) - y_i z_i] + (l2/2)|w|^2` with `z = w.x + b`;
/// the bias is never regularized. Public so the analytic gradient can be
/// audited against finite differences.
pub fn objective_and_gradient(
    rows: &[Vec<f64>],
    targets: &[f64],
    weights: &[f64],
    bias: f64,
    l2_strength: f64,
) -> (f64, Vec<f64>, f64) {
    let p = weights.len();
    let mut objective = 0.0;
    let mut grad_w = vec![0.0; p];
    let mut grad_b = 0.0;
    for (row, &y) in rows.iter().zip(targets) {
        let z = row.iter().zip(weights).map(|(x, w)| x * w).sum::<f64>() + bias;
        objective += ln1pexp(z) - y * z;
        let residual = sigmoid(z) - y;
        for (g, x) in grad_w.iter_mut().zip(row) {
            *g += residual * x;
        }
        grad_b += residual;
    }
    for (g, w) in grad_w.iter_mut().zip(weights) {
        objective += 0.5 * l2_strength * w * w;
        *g += l2_strength * w;
    }
    (objective, grad_w, grad_b)
}

/// Fits by full-batch gradient descent with Armijo backtracking, from the
/// zero vector, until the gradient norm falls to `convergence_tol`.
///
/// The step size persists across iterations (doubling after each accepted
/// step, halving inside the line search), so the search adapts to the
/// local curvature without any Hessian work.
pub fn fit(
    rows: &[Vec<f64>],
    labels: &[Condition],
    l2_strength: f64,
    max_iterations: usize,
    convergence_tol: f64,
) -> Result<LogisticModel> {
    let mut counts = [0usize; 2];
    for l in labels {
        counts[l.class_index()] += 1;
    }
    if counts[0] == 0 || counts[1] == 0 {
        return Err(Error::DegenerateLabels);
    }
    let targets: Vec<f64> = labels.iter().map(|l| l.class_index() as f64).collect();
    let p = rows[0].len();
    let mut weights = vec![0.0; p];
    let mut bias = 0.0;
    let mut step = 1.0;
    const ARMIJO_SLOPE: f64 = 1e-4;

    let (mut objective, mut grad_w, mut grad_b) =
        objective_and_gradient(rows, &targets, &weights, bias, l2_strength);
    for iteration in 0..max_iterations {
        let grad_sq = grad_w.iter().map(|g| g * g).sum::<f64>() + grad_b * grad_b;
        let grad_norm = grad_sq.sqrt();
        if grad_norm <= convergence_tol {
            return Ok(LogisticModel { weights, bias });
        }
        loop {
            let trial_w: Vec<f64> = weights
                .iter()
                .zip(&grad_w)
                .map(|(w, g)| w - step * g)
                .collect();
            let trial_b = bias - step * grad_b;
            let (trial_obj, trial_gw, trial_gb) =
                objective_and_gradient(rows, &targets, &trial_w, trial_b, l2_strength);
            if trial_obj <= objective - ARMIJO_SLOPE * step * grad_sq {
                weights = trial_w;
                bias = trial_b;
                objective = trial_obj;
                grad_w = trial_gw;
                grad_b = trial_gb;
                step *= 2.0;
                break;
            }
            step *= 0.5;
            if step < 1e-20 {
                // No descent step exists at this precision.
                return Err(Error::Convergence {
                    iterations: iteration,
                    residual: grad_norm,
                });
            }
        }
    }
    let grad_norm = (grad_w.iter().map(|g| g * g).sum::<f64>() + grad_b * grad_b).sqrt();
    if grad_norm <= convergence_tol {
        Ok(LogisticModel { weights, bias })
    } else {
        Err(Error::Convergence {
            iterations: max_iterations,
            residual: grad_norm,
        })
    }
}

impl LogisticModel {
    /// Probability of faulty: `sigmoid(w.x + b)`.
    pub fn score(&self, x: &[f64]) -> f64 {
        let z = x.iter().zip(&self.weights).map(|(v, w)| v * w).sum::<f64>() + self.bias;
        sigmoid(z)
    }
}
