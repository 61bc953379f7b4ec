use serde::{Deserialize, Serialize};

use crate::data::ColumnMatrix;
use crate::scalar::Scalar;

use super::params::LinearParams;

/// One linear weak learner: unshrunk changes to the bias and to the weights
/// of the features it touched.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "F: Scalar", deserialize = "F: Scalar"))]
pub struct LinearDelta<F: Scalar> {
    pub bias: F,
    /// `(feature, delta)` with non-zero deltas, ascending by feature.
    pub weights: Vec<(u32, F)>,
}

impl<F: Scalar> LinearDelta<F> {
    pub fn predict_row(&self, row: &[(u32, F)]) -> F {
        // Both sides are sorted by feature index.
        let (mut i, mut j) = (0, 0);
        let mut acc = self.bias;
        while i < row.len() && j < self.weights.len() {
            match row[i].0.cmp(&self.weights[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc += row[i].1 * self.weights[j].1;
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }
}

/// Accumulated (shrunk) linear model: the sum of `learning_rate * delta`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearWeights<F> {
    pub bias: F,
    pub weights: Vec<F>,
}

impl<F: Scalar> LinearWeights<F> {
    pub fn zeros(n_cols: usize) -> Self {
        LinearWeights {
            bias: F::zero(),
            weights: vec![F::zero(); n_cols],
        }
    }

    pub fn apply(&mut self, delta: &LinearDelta<F>, learning_rate: F) {
        self.bias += learning_rate * delta.bias;
        for &(j, d) in &delta.weights {
            self.weights[j as usize] += learning_rate * d;
        }
    }

    pub fn predict_row(&self, row: &[(u32, F)]) -> F {
        row.iter()
            .fold(self.bias, |acc, &(j, x)| acc + self.weights[j as usize] * x)
    }
}

/// Newton coordinate step for one weight under elastic-net penalties.
///
/// Minimizes the local quadratic `G d + ½ H d² + ½ λ (w + d)² + α |w + d|`,
/// never crossing zero in a single step.
pub fn coordinate_delta<F: Scalar>(sum_grad: F, sum_hess: F, w: F, lambda: F, alpha: F) -> F {
    if sum_hess < F::of(1e-5) {
        return F::zero();
    }
    let denom = sum_hess + lambda;
    let tmp = w - (sum_grad + lambda * w) / denom;
    if tmp >= F::zero() {
        (-(sum_grad + lambda * w + alpha) / denom).max(-w)
    } else {
        (-(sum_grad + lambda * w - alpha) / denom).min(-w)
    }
}

/// One coordinate-descent sweep: every feature in index order, then the bias.
///
/// Gradients are refreshed after each coordinate (`g_i += h_i x_ij lr Δw_j`),
/// with absent features contributing 0. `current` is the model accumulated
/// so far and supplies `w` to the penalty terms.
pub fn build_linear_delta<F: Scalar>(
    g: &[F],
    h: &[F],
    columns: &ColumnMatrix<F>,
    params: &LinearParams,
    current: &LinearWeights<F>,
) -> LinearDelta<F> {
    let lr = F::of(params.learning_rate);
    let lambda = F::of(params.lambda);
    let alpha = F::of(params.alpha);
    let mut grad = g.to_vec();
    let mut weights = Vec::new();
    for j in 0..columns.n_cols() {
        let col = columns.column(j);
        if col.is_empty() {
            continue;
        }
        let (mut sg, mut sh) = (F::zero(), F::zero());
        for &(r, x) in col {
            sg += grad[r as usize] * x;
            sh += h[r as usize] * x * x;
        }
        let w = current.weights[j];
        let d = coordinate_delta(sg, sh, w, lambda, alpha);
        if d != F::zero() {
            weights.push((j as u32, d));
            for &(r, x) in col {
                grad[r as usize] += h[r as usize] * x * lr * d;
            }
        }
    }
    let sg: F = grad.iter().copied().sum();
    let sh: F = h.iter().copied().sum();
    let bias = coordinate_delta(sg, sh, current.bias, F::of(params.lambda_bias), F::zero());
    LinearDelta { bias, weights }
}
