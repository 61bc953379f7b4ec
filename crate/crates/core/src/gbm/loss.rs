use serde::{Deserialize, Serialize};

use crate::data::LabelKind;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    /// Negative Bernoulli log-likelihood on `sigmoid(raw)`; binary labels.
    Logistic,
    /// Squared error on `raw`; continuous labels.
    Quadratic,
}

impl LossKind {
    pub fn label_kind(self) -> LabelKind {
        match self {
            LossKind::Logistic => LabelKind::Binary,
            LossKind::Quadratic => LabelKind::Continuous,
        }
    }

    pub fn for_labels(kind: LabelKind) -> Self {
        match kind {
            LabelKind::Binary => LossKind::Logistic,
            LabelKind::Continuous => LossKind::Quadratic,
        }
    }

    /// Output scale of a prediction: probability for logistic, raw for quadratic.
    pub fn transform<F: Scalar>(self, raw: F) -> F {
        match self {
            LossKind::Logistic => raw.sigmoid(),
            LossKind::Quadratic => raw,
        }
    }

    /// Loss at a single point, in the scaling whose derivatives [`grad_hess`]
    /// returns: the quadratic loss is `(raw - y)^2 / 2`.
    pub fn value<F: Scalar>(self, y: F, raw: F) -> F {
        match self {
            LossKind::Logistic => {
                // log(1 + e^raw) - y * raw, evaluated stably.
                let softplus = if raw > F::zero() {
                    raw + (-raw).exp().ln_1p()
                } else {
                    raw.exp().ln_1p()
                };
                softplus - y * raw
            }
            LossKind::Quadratic => {
                let d = raw - y;
                F::of(0.5) * d * d
            }
        }
    }
}

/// First and second derivative of the loss with respect to the raw score.
///
/// Logistic: `g = p - y`, `h = p (1 - p)` with `p = sigmoid(raw)`.
/// Quadratic: `g = raw - y`, `h = 1`.
#[inline]
pub fn grad_hess<F: Scalar>(loss: LossKind, y: F, raw: F) -> (F, F) {
    match loss {
        LossKind::Logistic => {
            let p = raw.sigmoid();
            (p - y, p * (F::one() - p))
        }
        LossKind::Quadratic => (raw - y, F::one()),
    }
}
