use serde::{Deserialize, Serialize};

use crate::data::SparseDataset;
use crate::error::DataError;
use crate::scalar::Scalar;

use super::linear::{LinearDelta, LinearWeights};
use super::loss::LossKind;
use super::params::BoosterParams;
use super::tree::DecisionTree;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoosterKind {
    #[serde(rename = "gbtree")]
    Tree,
    #[serde(rename = "gblinear")]
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[serde(bound(serialize = "F: Scalar", deserialize = "F: Scalar"))]
pub enum WeakLearner<F: Scalar> {
    Tree(DecisionTree<F>),
    Linear(LinearDelta<F>),
}

/// Stop-metric values after a boosting round; round 0 is the base score alone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundLog {
    pub train: f64,
    pub valid: f64,
}

/// A trained boosting model.
///
/// `raw(x) = base_score + learning_rate * Σ_{t < optimal_round} learner_t(x)`;
/// predictions are `sigmoid(raw)` for logistic loss and `raw` for quadratic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "F: Scalar", deserialize = "F: Scalar"))]
pub struct GbmModel<F: Scalar> {
    pub params: BoosterParams,
    pub loss: LossKind,
    pub n_cols: usize,
    pub base_score: F,
    pub learners: Vec<WeakLearner<F>>,
    pub optimal_round: usize,
    pub training_log: Vec<RoundLog>,
}

impl<F: Scalar> GbmModel<F> {
    pub fn booster(&self) -> BoosterKind {
        match self.params {
            BoosterParams::Tree(_) => BoosterKind::Tree,
            BoosterParams::Linear(_) => BoosterKind::Linear,
        }
    }

    pub fn learning_rate(&self) -> F {
        F::of(self.params.learning_rate())
    }

    /// Raw scores using the first `optimal_round` learners.
    pub fn predict_raw(&self, data: &SparseDataset<F>) -> Result<Vec<F>, DataError> {
        if data.n_cols() != self.n_cols {
            return Err(DataError::WidthMismatch {
                expected: self.n_cols,
                found: data.n_cols(),
            });
        }
        let used = &self.learners[..self.optimal_round.min(self.learners.len())];
        let lr = self.learning_rate();
        match self.booster() {
            BoosterKind::Tree => Ok(data
                .rows()
                .iter()
                .map(|row| {
                    used.iter().fold(self.base_score, |acc, l| match l {
                        WeakLearner::Tree(t) => acc + lr * t.predict_row(row),
                        WeakLearner::Linear(d) => acc + lr * d.predict_row(row),
                    })
                })
                .collect()),
            BoosterKind::Linear => {
                let mut w = LinearWeights::zeros(self.n_cols);
                for l in used {
                    if let WeakLearner::Linear(d) = l {
                        w.apply(d, lr);
                    }
                }
                Ok(data
                    .rows()
                    .iter()
                    .map(|row| self.base_score + w.predict_row(row))
                    .collect())
            }
        }
    }

    /// Predictions on the output scale of the loss.
    pub fn predict(&self, data: &SparseDataset<F>) -> Result<Vec<F>, DataError> {
        let raw = self.predict_raw(data)?;
        Ok(raw.into_iter().map(|r| self.loss.transform(r)).collect())
    }

    /// A copy holding only the learners that prediction uses.
    pub fn truncated(&self) -> Self {
        let mut m = self.clone();
        m.learners.truncate(self.optimal_round);
        m
    }
}
