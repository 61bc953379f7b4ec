//! Calibrated boosting forest.
//!
//! A two-layer stacked ensemble: layer 1 trains `H` gradient boosting machines
//! per label kind (binary labels with logistic loss, continuous labels with
//! quadratic loss) under stratified K-fold cross-validation and collects their
//! out-of-fold predictions; layer 2 fits elastic-net logistic regressions on
//! those predictions, which both weights the base models and calibrates the
//! output probability.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases at
//! the crate root fix it to `f64`, which is what the command-line tool uses.

pub mod data;
pub mod elastic_net;
pub mod ensemble;
pub mod error;
pub mod gbm;
pub mod metrics;
pub mod scalar;
pub mod seed;
pub mod service;

pub use error::{DataError, Error, MetricError, Result, TrainError};
pub use scalar::Scalar;

pub type Dataset = data::SparseDataset<f64>;
pub type GbmModel = gbm::GbmModel<f64>;
pub type DecisionTree = gbm::DecisionTree<f64>;
pub type ElasticNetModel = elastic_net::ElasticNetModel<f64>;
pub type CbfModel = ensemble::CbfModel<f64>;
pub type Layer1Bundle = ensemble::Layer1Bundle<f64>;
pub type Layer2Data = ensemble::Layer2Data<f64>;
pub type ReliabilityBins = metrics::ReliabilityBins<f64>;
