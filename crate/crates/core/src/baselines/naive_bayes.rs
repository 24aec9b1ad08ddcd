//! Gaussian naive Bayes with a variance floor.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signals::Condition;

/// Relative variance floor: each class-conditional variance is raised to
/// at least this fraction of the largest pooled feature variance.
pub const VARIANCE_FLOOR_FRACTION: f64 = 1e-9;

/// Absolute fallback floor for the degenerate case where every feature is
/// constant and the relative floor would be zero.
pub const VARIANCE_FLOOR_ABSOLUTE: f64 = 1e-18;

/// Class-conditional Gaussians, one per (class, feature), with priors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianNbModel {
    /// Log prior per class, indexed by [`Condition::class_index`].
    pub log_priors: [f64; 2],
    /// Per-class feature means.
    pub means: [Vec<f64>; 2],
    /// Per-class feature variances, floored strictly above zero.
    pub variances: [Vec<f64>; 2],
}

/// Fits per-class feature Gaussians (population variance) and class
/// priors from frequencies. Both classes must be present.
pub fn fit(rows: &[Vec<f64>], labels: &[Condition]) -> Result<GaussianNbModel> {
    let n = rows.len();
    let p = rows[0].len();
    let mut counts = [0usize; 2];
    for l in labels {
        counts[l.class_index()] += 1;
    }
    if counts[0] == 0 || counts[1] == 0 {
        return Err(Error::DegenerateLabels);
    }

    let mut means = [vec![0.0; p], vec![0.0; p]];
    for (row, label) in rows.iter().zip(labels) {
        let c = label.class_index();
        for (m, v) in means[c].iter_mut().zip(row) {
            *m += v;
        }
    }
    for c in 0..2 {
        for m in &mut means[c] {
            *m /= counts[c] as f64;
        }
    }

    let mut variances = [vec![0.0; p], vec![0.0; p]];
    for (row, label) in rows.iter().zip(labels) {
        let c = label.class_index();
        for ((s, v), m) in variances[c].iter_mut().zip(row).zip(&means[c]) {
            let d = v - m;
            *s += d * d;
        }
    }
    for c in 0..2 {
        for s in &mut variances[c] {
            *s /= counts[c] as f64;
        }
    }

    // Pooled (all-class) variance per feature sets the scale of the floor.
    let mut pooled_means = vec![0.0; p];
    for row in rows {
        for (m, v) in pooled_means.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in &mut pooled_means {
        *m /= n as f64;
    }
    let mut max_pooled_var = 0.0f64;
    for j in 0..p {
        let var: f64 = rows
            .iter()
            .map(|r| {
                let d = r[j] - pooled_means[j];
                d * d
            })
            .sum::<f64>()
            / n as f64;
        max_pooled_var = max_pooled_var.max(var);
    }
    let floor = (VARIANCE_FLOOR_FRACTION * max_pooled_var).max(VARIANCE_FLOOR_ABSOLUTE);
    for c in 0..2 {
        for s in &mut variances[c] {
            *s = s.max(floor);
        }
    }

    Ok(GaussianNbModel {
        log_priors: [
            (counts[0] as f64 / n as f64).ln(),
            (counts[1] as f64 / n as f64).ln(),
        ],
        means,
        variances,
    })
}

impl GaussianNbModel {
    /// Log-posterior difference `log P(faulty | x) - log P(healthy | x)`
    /// (the shared evidence term cancels). Zero is the decision boundary.
    pub fn score(&self, x: &[f64]) -> f64 {
        let log_density = |c: usize| -> f64 {
            let mut acc = self.log_priors[c];
            for ((v, m), s2) in x.iter().zip(&self.means[c]).zip(&self.variances[c]) {
                let d = v - m;
                acc -= 0.5 * (std::f64::consts::TAU * s2).ln() + d * d / (2.0 * s2);
            }
            acc
        };
        log_density(1) - log_density(0)
    }
}
