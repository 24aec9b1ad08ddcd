//! Per-feature standardization frozen at training time.

use serde::{Deserialize, Serialize};

/// Column means and standard deviations captured from a training fold.
///
/// Scoring-time inputs are shifted and scaled by these frozen statistics;
/// they are never recomputed from test data. A constant column gets a
/// standard deviation of 1 so it maps to zero instead of dividing by zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    means: Vec<f64>,
    stds: Vec<f64>,
}

impl Standardizer {
    /// Captures column statistics (population deviation, divisor n).
    /// Panics on an empty matrix; callers validate datasets first.
    pub fn fit(rows: &[Vec<f64>]) -> Self {
        assert!(!rows.is_empty(), "standardizer needs at least one row");
        let p = rows[0].len();
        let n = rows.len() as f64;
        let mut means = vec![0.0; p];
        for row in rows {
            for (m, v) in means.iter_mut().zip(row) {
                *m += v;
            }
        }
        for m in &mut means {
            *m /= n;
        }
        let mut stds = vec![0.0; p];
        for row in rows {
            for ((s, v), m) in stds.iter_mut().zip(row).zip(&means) {
                let d = v - m;
                *s += d * d;
            }
        }
        for s in &mut stds {
            *s = (*s / n).sqrt();
            if *s == 0.0 {
                *s = 1.0;
            }
        }
        Standardizer { means, stds }
    }

    pub fn n_features(&self) -> usize {
        self.means.len()
    }

    /// Standardizes one row in place.
    pub fn apply(&self, x: &mut [f64]) {
        for ((v, m), s) in x.iter_mut().zip(&self.means).zip(&self.stds) {
            *v = (*v - m) / s;
        }
    }

    /// Standardized copies of all rows.
    pub fn apply_all(&self, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        rows.iter()
            .map(|row| {
                let mut r = row.clone();
                self.apply(&mut r);
                r
            })
            .collect()
    }
}
