use serde::{Deserialize, Serialize};

use crate::error::TrainError;

/// Hyper-parameters of a tree booster.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeParams {
    /// Minimum gain for a split to be kept.
    pub gamma: f64,
    pub max_depth: usize,
    /// Minimum hessian sum in each child.
    pub min_child_weight: f64,
    /// Leaf weights are clipped to `±max_delta_step` when it is positive.
    pub max_delta_step: f64,
    pub subsample: f64,
    pub colsample_bytree: f64,
    pub colsample_bylevel: f64,
    /// L2 penalty on leaf weights.
    pub lambda: f64,
    /// L1 penalty on leaf weights.
    pub alpha: f64,
    pub learning_rate: f64,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            gamma: 0.0,
            max_depth: 6,
            min_child_weight: 1.0,
            max_delta_step: 0.0,
            subsample: 1.0,
            colsample_bytree: 1.0,
            colsample_bylevel: 1.0,
            lambda: 1.0,
            alpha: 0.0,
            learning_rate: 0.3,
        }
    }
}

/// Hyper-parameters of a linear booster.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearParams {
    pub lambda: f64,
    pub alpha: f64,
    pub lambda_bias: f64,
    pub learning_rate: f64,
}

impl Default for LinearParams {
    fn default() -> Self {
        LinearParams {
            lambda: 0.0,
            alpha: 0.0,
            lambda_bias: 0.0,
            learning_rate: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "booster", rename_all = "snake_case")]
pub enum BoosterParams {
    #[serde(rename = "gbtree")]
    Tree(TreeParams),
    #[serde(rename = "gblinear")]
    Linear(LinearParams),
}

impl BoosterParams {
    pub fn learning_rate(&self) -> f64 {
        match self {
            BoosterParams::Tree(p) => p.learning_rate,
            BoosterParams::Linear(p) => p.learning_rate,
        }
    }

    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |what: &str, v: f64| Err(TrainError::InvalidParameter(format!("{what} = {v}")));
        let nonneg = |v: f64| v >= 0.0 && v.is_finite();
        let unit = |v: f64| v > 0.0 && v <= 1.0;
        match *self {
            BoosterParams::Tree(p) => {
                for (name, v) in [
                    ("gamma", p.gamma),
                    ("min_child_weight", p.min_child_weight),
                    ("max_delta_step", p.max_delta_step),
                    ("lambda", p.lambda),
                    ("alpha", p.alpha),
                ] {
                    if !nonneg(v) {
                        return bad(name, v);
                    }
                }
                for (name, v) in [
                    ("subsample", p.subsample),
                    ("colsample_bytree", p.colsample_bytree),
                    ("colsample_bylevel", p.colsample_bylevel),
                    ("learning_rate", p.learning_rate),
                ] {
                    if !unit(v) {
                        return bad(name, v);
                    }
                }
            }
            BoosterParams::Linear(p) => {
                for (name, v) in [("lambda", p.lambda), ("alpha", p.alpha), ("lambda_bias", p.lambda_bias)] {
                    if !nonneg(v) {
                        return bad(name, v);
                    }
                }
                if !unit(p.learning_rate) {
                    return bad("learning_rate", p.learning_rate);
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_rejects_out_of_range() {
        assert!(BoosterParams::Tree(TreeParams::default()).validate().is_ok());
        let p = TreeParams {
            subsample: 0.0,
            ..TreeParams::default()
        };
        assert!(BoosterParams::Tree(p).validate().is_err());
        let p = LinearParams {
            lambda: -1.0,
            ..LinearParams::default()
        };
        assert!(BoosterParams::Linear(p).validate().is_err());
    }

    #[test]
    fn serde_tags_booster() {
        let s = serde_json::to_string(&BoosterParams::Linear(LinearParams::default())).unwrap();
        assert!(s.contains("\"booster\":\"gblinear\""), "{s}");
        let back: BoosterParams = serde_json::from_str(&s).unwrap();
        assert_eq!(back, BoosterParams::Linear(LinearParams::default()));
    }
}
