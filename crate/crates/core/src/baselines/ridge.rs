//! Linear ridge classifier: regularized least squares against +/-1 targets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signals::Condition;

/// Linear signed-response model; 0 is the decision boundary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RidgeModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

/// Target encoding: faulty +1, healthy -1.
fn target(label: Condition) -> f64 {
    match label {
        Condition::Healthy => -1.0,
        Condition::Faulty => 1.0,
    }
}

/// Builds the regularized normal equations `A beta = rhs` over the
/// bias-augmented design, with the ridge penalty on the first `p`
/// diagonal entries only (the bias is never shrunk). `beta` stacks the
/// `p` weights then the bias. Public so solutions can be audited by
/// substituting them back in.
pub fn normal_equations(
    rows: &[Vec<f64>],
    labels: &[Condition],
    regularization_strength: f64,
) -> (Vec<Vec<f64>>, Vec<f64>) {
    let p = rows[0].len();
    let mut a = vec![vec![0.0; p + 1]; p + 1];
    let mut rhs = vec![0.0; p + 1];
    for (row, &label) in rows.iter().zip(labels) {
        let y = target(label);
        for j in 0..p {
            for k in 0..p {
                a[j][k] += row[j] * row[k];
            }
            a[j][p] += row[j];
            a[p][j] += row[j];
            rhs[j] += row[j] * y;
        }
        a[p][p] += 1.0;
        rhs[p] += y;
    }
    for j in 0..p {
        a[j][j] += regularization_strength;
    }
    (a, rhs)
}

/// Gaussian elimination with partial pivoting; consumes its inputs.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&r, &s| {
                a[r][col]
                    .abs()
                    .partial_cmp(&a[s][col].abs())
                    .expect("finite matrix entry")
            })
            .expect("non-empty column");
        if a[pivot_row][col].abs() < f64::MIN_POSITIVE {
            return Err(Error::InvalidConfig(
                "normal equations are singular; raise regularization_strength".to_string(),
            ));
        }
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Ok(x)
}

/// Solves the normal equations directly; no iteration, no tolerance.
pub fn fit(
    rows: &[Vec<f64>],
    labels: &[Condition],
    regularization_strength: f64,
) -> Result<RidgeModel> {
    let mut counts = [0usize; 2];
    for l in labels {
        counts[l.class_index()] += 1;
    }
    if counts[0] == 0 || counts[1] == 0 {
        return Err(Error::DegenerateLabels);
    }
    let (a, rhs) = normal_equations(rows, labels, regularization_strength);
    let mut beta = solve(a, rhs)?;
    let bias = beta.pop().expect("bias entry");
    Ok(RidgeModel {
        weights: beta,
        bias,
    })
}

impl RidgeModel {
    /// Signed linear response `w.x + b`; positive means faulty.
    pub fn score(&self, x: &[f64]) -> f64 {
        x.iter().zip(&self.weights).map(|(v, w)| v * w).sum::<f64>() + self.bias
    }
}
