use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::{binarize, ColumnMatrix, LabelKind, LabelMapping, SparseDataset};
use crate::error::{DataError, TrainError};
use crate::metrics::MetricSpec;
use crate::scalar::Scalar;

use super::linear::{build_linear_delta, LinearWeights};
use super::loss::{grad_hess, LossKind};
use super::model::{GbmModel, RoundLog, WeakLearner};
use super::params::BoosterParams;
use super::tree::build_tree;

pub const DEFAULT_PATIENCE: usize = 100;
pub const DEFAULT_MAX_ROUNDS: usize = 2000;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOptions {
    pub loss: LossKind,
    /// Metric on the validation fold that decides the optimal round; higher
    /// oriented values are better.
    pub stop_metric: MetricSpec,
    /// Rounds without strict improvement before training stops.
    pub patience: usize,
    pub max_rounds: usize,
    pub seed: u64,
    /// Maps continuous labels to the binary labels the stop metric needs.
    pub label_mapping: Option<LabelMapping>,
}

impl TrainOptions {
    pub fn new(loss: LossKind, stop_metric: MetricSpec, seed: u64) -> Self {
        TrainOptions {
            loss,
            stop_metric,
            patience: DEFAULT_PATIENCE,
            max_rounds: DEFAULT_MAX_ROUNDS,
            seed,
            label_mapping: None,
        }
    }
}

/// Binary labels a ranking metric is evaluated against: the dataset's binary
/// labels, or its continuous labels passed through `mapping`.
pub(crate) fn eval_labels<F: Scalar>(
    ds: &SparseDataset<F>,
    mapping: Option<&LabelMapping>,
) -> Result<Vec<u8>, TrainError> {
    if let Some(y) = ds.binary_labels() {
        return Ok(y.to_vec());
    }
    match (ds.continuous_labels(), mapping) {
        (Some(c), Some(m)) => Ok(binarize(c, m)?),
        (Some(_), None) => Err(TrainError::LabelMismatch(
            "continuous labels need a label mapping for the stop metric".into(),
        )),
        _ => Err(TrainError::Data(DataError::Invalid("dataset carries no labels".into()))),
    }
}

/// Trains one boosting model on `train`, early-stopping on `valid`.
///
/// Each round fits a weak learner to the loss gradients of the current raw
/// scores and adds it with weight `learning_rate`. The stop metric is logged
/// on both sets after every round (round 0 = base score only); training ends
/// after `patience` rounds without a strictly better validation value, or at
/// `max_rounds`. `optimal_round` is the first round attaining the best value.
pub fn train_gbm<F: Scalar>(
    train: &SparseDataset<F>,
    valid: &SparseDataset<F>,
    params: &BoosterParams,
    opts: &TrainOptions,
) -> Result<GbmModel<F>, TrainError> {
    params.validate()?;
    opts.stop_metric.validate()?;
    if train.n_rows() == 0 {
        return Err(TrainError::EmptyTrain);
    }
    if valid.n_rows() == 0 {
        return Err(TrainError::InvalidParameter("validation set is empty".into()));
    }
    if train.n_cols() != valid.n_cols() {
        return Err(DataError::WidthMismatch {
            expected: train.n_cols(),
            found: valid.n_cols(),
        }
        .into());
    }
    let loss = opts.loss;
    let y: Vec<F> = train.labels_as_scalar(loss.label_kind()).ok_or_else(|| {
        TrainError::LabelMismatch(format!("{loss:?} loss needs {} labels", loss.label_kind().as_str()))
    })?;
    let mapping = opts.label_mapping.as_ref();
    let (train_eval, valid_eval) = match loss.label_kind() {
        LabelKind::Binary => (eval_labels(train, None)?, eval_labels(valid, None)?),
        LabelKind::Continuous => (eval_labels_cont(train, mapping)?, eval_labels_cont(valid, mapping)?),
    };

    let base_score = match loss {
        LossKind::Logistic => F::zero(),
        LossKind::Quadratic => y.iter().copied().sum::<F>() / F::of(y.len() as f64),
    };
    let lr = F::of(params.learning_rate());
    let columns = ColumnMatrix::from_dataset(train);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut linear = LinearWeights::zeros(train.n_cols());

    let mut raw_train = vec![base_score; train.n_rows()];
    let mut raw_valid = vec![base_score; valid.n_rows()];
    let metric = opts.stop_metric;
    let score = |raw: &[F], labels: &[u8]| -> Result<F, crate::error::MetricError> {
        let out: Vec<F> = raw.iter().map(|&r| loss.transform(r)).collect();
        metric.evaluate(&out, labels)
    };
    let orient = |v: F| if metric.larger_is_better() { v } else { -v };

    let first_valid = score(&raw_valid, &valid_eval).map_err(TrainError::StopMetric)?;
    let first_train = score(&raw_train, &train_eval).map_err(TrainError::StopMetric)?;
    let mut log = vec![RoundLog {
        train: first_train.as_f64(),
        valid: first_valid.as_f64(),
    }];
    let mut best = (orient(first_valid), 0usize);
    let mut learners = Vec::new();
    let mut g = vec![F::zero(); train.n_rows()];
    let mut h = vec![F::zero(); train.n_rows()];

    for round in 1..=opts.max_rounds {
        for i in 0..train.n_rows() {
            let (gi, hi) = grad_hess(loss, y[i], raw_train[i]);
            g[i] = gi;
            h[i] = hi;
        }
        let learner = match params {
            BoosterParams::Tree(p) => WeakLearner::Tree(build_tree(&g, &h, train, &columns, p, &mut rng)),
            BoosterParams::Linear(p) => {
                let delta = build_linear_delta(&g, &h, &columns, p, &linear);
                linear.apply(&delta, lr);
                WeakLearner::Linear(delta)
            }
        };
        let out = |row: &[(u32, F)]| match &learner {
            WeakLearner::Tree(t) => t.predict_row(row),
            WeakLearner::Linear(d) => d.predict_row(row),
        };
        for (r, row) in raw_train.iter_mut().zip(train.rows()) {
            *r += lr * out(row);
        }
        for (r, row) in raw_valid.iter_mut().zip(valid.rows()) {
            *r += lr * out(row);
        }
        learners.push(learner);

        let v = score(&raw_valid, &valid_eval).map_err(TrainError::StopMetric)?;
        let t = score(&raw_train, &train_eval).map_err(TrainError::StopMetric)?;
        log.push(RoundLog {
            train: t.as_f64(),
            valid: v.as_f64(),
        });
        if orient(v) > best.0 {
            best = (orient(v), round);
        } else if round - best.1 >= opts.patience {
            break;
        }
    }

    Ok(GbmModel {
        params: *params,
        loss,
        n_cols: train.n_cols(),
        base_score,
        learners,
        optimal_round: best.1,
        training_log: log,
    })
}

fn eval_labels_cont<F: Scalar>(ds: &SparseDataset<F>, mapping: Option<&LabelMapping>) -> Result<Vec<u8>, TrainError> {
    // A mapping, when given, is the source of truth for regression models.
    match (ds.continuous_labels(), mapping) {
        (Some(c), Some(m)) => Ok(binarize(c, m)?),
        _ => eval_labels(ds, mapping),
    }
}
