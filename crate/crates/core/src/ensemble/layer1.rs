use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{binarize, FoldAssignment, LabelKind, LabelMapping, SparseDataset};
use crate::error::{DataError, TrainError};
use crate::gbm::{train_gbm, GbmModel, LossKind, TrainOptions};
use crate::metrics::MetricSpec;
use crate::scalar::Scalar;
use crate::seed::derive_seed;

use super::sampling::HyperParamSample;

/// Per-model, per-fold cross-validation scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvScore {
    pub metric: MetricSpec,
    /// `folds[h][k]`: score of model `h` on fold `k`.
    pub folds: Vec<Vec<f64>>,
}

impl CvScore {
    /// Mean over folds for each model.
    pub fn means(&self) -> Vec<f64> {
        self.folds
            .iter()
            .map(|f| f.iter().sum::<f64>() / f.len() as f64)
            .collect()
    }

    /// Index of the best mean, the lowest index on ties. NaN means never win.
    pub fn best(&self) -> Option<usize> {
        let means = self.means();
        let mut best: Option<(usize, f64)> = None;
        for (h, &m) in means.iter().enumerate() {
            if m.is_nan() {
                continue;
            }
            let v = if self.metric.larger_is_better() { m } else { -m };
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((h, v));
            }
        }
        best.map(|(h, _)| h)
    }
}

/// Options shared by all layer-1 trainings of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer1Options {
    pub stop_metric: MetricSpec,
    /// Metric for the cross-validation table; models are compared on it.
    pub cv_metric: MetricSpec,
    pub patience: usize,
    pub max_rounds: usize,
    pub seed: u64,
    pub label_mapping: Option<LabelMapping>,
}

/// The `H × K` models trained on one label kind and their out-of-fold output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "F: Scalar", deserialize = "F: Scalar"))]
pub struct Layer1Bundle<F: Scalar> {
    pub label_kind: LabelKind,
    pub samples: Vec<HyperParamSample>,
    /// `models[h][k]` was trained without fold `k`.
    pub models: Vec<Vec<GbmModel<F>>>,
    /// `md_columns[h][n]`: prediction for row `n` by the model that did not
    /// see `n`'s fold. Not persisted.
    #[serde(skip)]
    pub md_columns: Vec<Vec<F>>,
    /// `md_source[h][n]`: fold index `k` of the model that produced
    /// `md_columns[h][n]`. Not persisted.
    #[serde(skip)]
    pub md_source: Vec<Vec<usize>>,
    #[serde(skip)]
    pub cv: Option<CvScore>,
}

impl<F: Scalar> Layer1Bundle<F> {
    pub fn h(&self) -> usize {
        self.samples.len()
    }

    pub fn k(&self) -> usize {
        self.models.first().map_or(0, Vec::len)
    }

    /// Fold-averaged prediction of model `h` on every row of `data`.
    pub fn predict_model(&self, h: usize, data: &SparseDataset<F>) -> Result<Vec<F>, DataError> {
        let folds = &self.models[h];
        let mut acc = vec![F::zero(); data.n_rows()];
        for m in folds {
            for (a, p) in acc.iter_mut().zip(m.predict(data)?) {
                *a += p;
            }
        }
        let k = F::of(folds.len() as f64);
        Ok(acc.into_iter().map(|a| a / k).collect())
    }

    /// Checks that every MD cell came from a model trained without its row.
    pub fn out_of_fold(&self, folds: &FoldAssignment) -> bool {
        self.md_source.iter().all(|src| {
            src.len() == folds.n_rows()
                && src.iter().zip(folds.fold_of_row()).all(|(&k, &f)| {
                    // Model k trained on every fold but k.
                    k == f && !folds.train_indices(k).iter().any(|&i| folds.fold_of_row()[i] == f)
                })
        })
    }
}

/// Binary labels of `data`, taken directly or through `mapping`.
pub fn binary_view<F: Scalar>(data: &SparseDataset<F>, mapping: Option<&LabelMapping>) -> Result<Vec<u8>, TrainError> {
    if let Some(y) = data.binary_labels() {
        return Ok(y.to_vec());
    }
    match (data.continuous_labels(), mapping) {
        (Some(c), Some(m)) => Ok(binarize(c, m)?),
        (Some(_), None) => Err(TrainError::LabelMismatch(
            "continuous labels need a label mapping".into(),
        )),
        _ => Err(DataError::Invalid("dataset carries no labels".into()).into()),
    }
}

fn kind_tag(kind: LabelKind) -> u64 {
    match kind {
        LabelKind::Binary => 1,
        LabelKind::Continuous => 2,
    }
}

/// Trains model `h` on every `D^(-k)` with early stopping on `D_k`, and
/// collects each fold's predictions into out-of-fold columns.
///
/// The `(h, k)` fits run on the current rayon pool; each draws randomness
/// from a stream keyed by `(seed, label kind, h, k)`, so the result does not
/// depend on scheduling.
pub fn train_layer1<F: Scalar>(
    data: &SparseDataset<F>,
    kind: LabelKind,
    folds: &FoldAssignment,
    samples: &[HyperParamSample],
    opts: &Layer1Options,
) -> Result<Layer1Bundle<F>, TrainError> {
    if folds.n_rows() != data.n_rows() {
        return Err(DataError::LengthMismatch {
            what: "fold assignment",
            expected: data.n_rows(),
            found: folds.n_rows(),
        }
        .into());
    }
    if samples.is_empty() {
        return Err(TrainError::InvalidParameter("H must be at least 1".into()));
    }
    let loss = LossKind::for_labels(kind);
    if data.labels_as_scalar(kind).is_none() {
        return Err(TrainError::LabelMismatch(format!(
            "dataset has no {} labels",
            kind.as_str()
        )));
    }
    let eval_y = binary_view(data, opts.label_mapping.as_ref())?;
    let k = folds.k();
    let splits: Vec<(Vec<usize>, SparseDataset<F>, SparseDataset<F>)> = (0..k)
        .map(|fold| {
            let valid_idx = folds.valid_indices(fold);
            let train = data.subset(&folds.train_indices(fold));
            let valid = data.subset(&valid_idx);
            (valid_idx, train, valid)
        })
        .collect();

    let jobs: Vec<(usize, usize)> = (0..samples.len()).flat_map(|h| (0..k).map(move |f| (h, f))).collect();
    let fits: Vec<GbmModel<F>> = jobs
        .par_iter()
        .map(|&(h, f)| {
            let (_, train, valid) = &splits[f];
            let topts = TrainOptions {
                loss,
                stop_metric: opts.stop_metric,
                patience: opts.patience,
                max_rounds: opts.max_rounds,
                seed: derive_seed(opts.seed, &[kind_tag(kind), h as u64, f as u64]),
                label_mapping: opts.label_mapping,
            };
            train_gbm(train, valid, &samples[h].params, &topts)
        })
        .collect::<Result<_, _>>()?;

    let n = data.n_rows();
    let mut models: Vec<Vec<GbmModel<F>>> = Vec::with_capacity(samples.len());
    let mut md_columns = vec![vec![F::zero(); n]; samples.len()];
    let mut md_source = vec![vec![usize::MAX; n]; samples.len()];
    let mut cv_folds = vec![vec![f64::NAN; k]; samples.len()];
    let mut fits = fits.into_iter();
    for h in 0..samples.len() {
        let mut row = Vec::with_capacity(k);
        for (f, (valid_idx, _, valid)) in splits.iter().enumerate() {
            let m = fits.next().expect("one fit per job");
            let pred = m.predict(valid)?;
            for (&i, &p) in valid_idx.iter().zip(&pred) {
                md_columns[h][i] = p;
                md_source[h][i] = f;
            }
            let fold_y: Vec<u8> = valid_idx.iter().map(|&i| eval_y[i]).collect();
            let usable = loss == LossKind::Logistic || opts.cv_metric.is_ranking();
            if usable {
                cv_folds[h][f] = opts.cv_metric.evaluate(&pred, &fold_y)?.as_f64();
            }
            row.push(m.truncated());
        }
        models.push(row);
    }

    Ok(Layer1Bundle {
        label_kind: kind,
        samples: samples.to_vec(),
        models,
        md_columns,
        md_source,
        cv: Some(CvScore {
            metric: opts.cv_metric,
            folds: cv_folds,
        }),
    })
}
