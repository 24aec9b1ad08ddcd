//! RBF-kernel support vector machine fitted by simplified sequential
//! minimal optimization.
//!
//! The optimizer sweeps the training set in a seeded random order,
//! pairing each Karush-Kuhn-Tucker violator with one random partner and
//! solving the two-variable subproblem in closed form. Sweeps repeat
//! until `max_passes` consecutive sweeps change nothing, at which point
//! every training point satisfies the KKT conditions within `smo_tol`
//! unless its only available updates were degenerate (see
//! [`SvmModel::max_kkt_violation`] for the audit).

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeding;
use crate::signals::Condition;

/// Abort threshold: an optimization this size should terminate within a
/// few hundred sweeps; thousands signal a cycling working set.
const MAX_SWEEPS: usize = 10_000;

/// Two-variable updates smaller than this are treated as no progress.
const MIN_ALPHA_STEP: f64 = 1e-7;

/// Random partners drawn for one violator before moving on.
const PARTNER_ATTEMPTS: usize = 8;

/// A fitted SVM. All training rows are retained (not only the support
/// vectors) so the KKT conditions can be audited on every point; scoring
/// skips the zero-coefficient rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub gamma: f64,
    pub cost: f64,
    pub smo_tol: f64,
    pub bias: f64,
    /// Dual coefficient per training row, in `[0, cost]`.
    pub alphas: Vec<f64>,
    pub training_rows: Vec<Vec<f64>>,
    /// Targets encoded faulty +1, healthy -1.
    pub training_targets: Vec<f64>,
}

fn rbf(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    let dist_sq: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-gamma * dist_sq).exp()
}

/// Fits with cost `C`, kernel width `gamma`, and the given working-set
/// seed. `max_passes` is the number of consecutive changeless sweeps that
/// declares convergence.
pub fn fit(
    rows: &[Vec<f64>],
    labels: &[Condition],
    cost: f64,
    gamma: f64,
    smo_tol: f64,
    max_passes: usize,
    seed: u64,
) -> Result<SvmModel> {
    let n = rows.len();
    let mut counts = [0usize; 2];
    for l in labels {
        counts[l.class_index()] += 1;
    }
    if counts[0] == 0 || counts[1] == 0 {
        return Err(Error::DegenerateLabels);
    }

    let y: Vec<f64> = labels
        .iter()
        .map(|l| match l {
            Condition::Healthy => -1.0,
            Condition::Faulty => 1.0,
        })
        .collect();

    let kernel: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| rbf(&rows[i], &rows[j], gamma)).collect())
        .collect();

    let mut alphas = vec![0.0f64; n];
    let mut bias = 0.0f64;
    let decision = |alphas: &[f64], bias: f64, i: usize| -> f64 {
        let mut acc = bias;
        for k in 0..n {
            if alphas[k] != 0.0 {
                acc += alphas[k] * y[k] * kernel[k][i];
            }
        }
        acc
    };

    let mut rng = seeding::rng(seed);
    let mut order: Vec<usize> = (0..n).collect();
    let mut quiet_sweeps = 0;
    let mut sweeps = 0;

    while quiet_sweeps < max_passes {
        sweeps += 1;
        if sweeps > MAX_SWEEPS {
            let model = SvmModel {
                gamma,
                cost,
                smo_tol,
                bias,
                alphas,
                training_rows: rows.to_vec(),
                training_targets: y,
            };
            return Err(Error::Convergence {
                iterations: MAX_SWEEPS,
                residual: model.max_kkt_violation(),
            });
        }
        order.shuffle(&mut rng);
        let mut changed = 0usize;
        for &i in &order {
            let err_i = decision(&alphas, bias, i) - y[i];
            let r_i = y[i] * err_i;
            let violates = (r_i < -smo_tol && alphas[i] < cost) || (r_i > smo_tol && alphas[i] > 0.0);
            if !violates {
                continue;
            }
            // A single random partner can yield a degenerate subproblem
            // (empty box, eta >= 0, or a vanishing step) and strand the
            // violator; a few redraws make that vanishingly unlikely.
            for _attempt in 0..PARTNER_ATTEMPTS {
                let mut j = rng.random_range(0..n - 1);
                if j >= i {
                    j += 1;
                }
                let err_j = decision(&alphas, bias, j) - y[j];

                let (alpha_i_old, alpha_j_old) = (alphas[i], alphas[j]);
                let (low, high) = if (y[i] - y[j]).abs() > f64::EPSILON {
                    (
                        (alpha_j_old - alpha_i_old).max(0.0),
                        (cost + alpha_j_old - alpha_i_old).min(cost),
                    )
                } else {
                    (
                        (alpha_i_old + alpha_j_old - cost).max(0.0),
                        (alpha_i_old + alpha_j_old).min(cost),
                    )
                };
                if low >= high {
                    continue;
                }
                let eta = 2.0 * kernel[i][j] - kernel[i][i] - kernel[j][j];
                if eta >= 0.0 {
                    continue;
                }
                let alpha_j = (alpha_j_old - y[j] * (err_i - err_j) / eta).clamp(low, high);
                if (alpha_j - alpha_j_old).abs() < MIN_ALPHA_STEP {
                    continue;
                }
                // The pairwise constraint keeps alpha_i in [0, cost] in
                // exact arithmetic; the clamp absorbs the last-ULP float
                // spill.
                let alpha_i = (alpha_i_old + y[i] * y[j] * (alpha_j_old - alpha_j))
                    .clamp(0.0, cost);

                let b1 = bias
                    - err_i
                    - y[i] * (alpha_i - alpha_i_old) * kernel[i][i]
                    - y[j] * (alpha_j - alpha_j_old) * kernel[i][j];
                let b2 = bias
                    - err_j
                    - y[i] * (alpha_i - alpha_i_old) * kernel[i][j]
                    - y[j] * (alpha_j - alpha_j_old) * kernel[j][j];
                bias = if alpha_i > 0.0 && alpha_i < cost {
                    b1
                } else if alpha_j > 0.0 && alpha_j < cost {
                    b2
                } else {
                    0.5 * (b1 + b2)
                };
                alphas[i] = alpha_i;
                alphas[j] = alpha_j;
                changed += 1;
                break;
            }
        }
        if changed == 0 {
            quiet_sweeps += 1;
        } else {
            quiet_sweeps = 0;
        }
    }

    Ok(SvmModel {
        gamma,
        cost,
        smo_tol,
        bias,
        alphas,
        training_rows: rows.to_vec(),
        training_targets: y,
    })
}

impl SvmModel {
    /// Decision-function value; positive means faulty.
    pub fn score(&self, x: &[f64]) -> f64 {
        let mut acc = self.bias;
        for ((alpha, row), target) in self
            .alphas
            .iter()
            .zip(&self.training_rows)
            .zip(&self.training_targets)
        {
            if *alpha != 0.0 {
                acc += alpha * target * rbf(row, x, self.gamma);
            }
        }
        acc
    }

    /// Largest KKT violation over the training set, in margin units.
    ///
    /// Points with zero coefficient must sit on or outside the margin
    /// (`y f(x) >= 1`), saturated points on or inside it (`y f(x) <= 1`),
    /// free points exactly on it. The return value is how far the worst
    /// point strays; a sound fit keeps it within `smo_tol`.
    pub fn max_kkt_violation(&self) -> f64 {
        let boundary_eps = 1e-8 * self.cost.max(1.0);
        let mut worst = 0.0f64;
        for (i, row) in self.training_rows.iter().enumerate() {
            let margin = self.training_targets[i] * self.score(row);
            let alpha = self.alphas[i];
            let violation = if alpha <= boundary_eps {
                (1.0 - margin).max(0.0)
            } else if alpha >= self.cost - boundary_eps {
                (margin - 1.0).max(0.0)
            } else {
                (margin - 1.0).abs()
            };
            worst = worst.max(violation);
        }
        worst
    }

    /// Number of rows with a non-zero dual coefficient.
    pub fn support_count(&self) -> usize {
        self.alphas.iter().filter(|&&a| a != 0.0).count()
    }
}
