//! Newton gradient boosting with tree (`gbtree`) and linear (`gblinear`) weak
//! learners, logistic and quadratic losses, and early stopping on a ranking
//! metric evaluated on a validation fold.

mod linear;
mod loss;
mod model;
mod params;
mod train;
mod tree;

pub use self::linear::{build_linear_delta, coordinate_delta, LinearDelta, LinearWeights};
pub use self::loss::{grad_hess, LossKind};
pub use self::model::{BoosterKind, GbmModel, RoundLog, WeakLearner};
pub use self::params::{BoosterParams, LinearParams, TreeParams};
pub use self::train::{train_gbm, TrainOptions, DEFAULT_MAX_ROUNDS, DEFAULT_PATIENCE};
pub use self::tree::{build_tree, DecisionTree, Node};
