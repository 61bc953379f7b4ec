use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{FoldAssignment, LabelKind};
use crate::elastic_net::{fit_elastic_net, ElasticNetModel, ElasticNetParams};
use crate::error::{DataError, TrainError};
use crate::metrics::MetricSpec;
use crate::scalar::Scalar;

use super::layer1::{CvScore, Layer1Bundle};

/// Source of one layer-2 input column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnTag {
    pub label_kind: LabelKind,
    pub h: usize,
}

/// Layer-2 training data: out-of-fold layer-1 predictions with binary labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer2Data<F> {
    /// One vector per column, in `manifest` order.
    pub columns: Vec<Vec<F>>,
    pub labels: Vec<u8>,
    pub manifest: Vec<ColumnTag>,
}

impl<F: Scalar> Layer2Data<F> {
    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn width(&self) -> usize {
        self.columns.len()
    }

    fn rows(&self, idx: &[usize]) -> (Vec<Vec<F>>, Vec<u8>) {
        let cols = self
            .columns
            .iter()
            .map(|c| idx.iter().map(|&i| c[i]).collect())
            .collect();
        (cols, idx.iter().map(|&i| self.labels[i]).collect())
    }
}

/// Column order for a set of bundles: binary-label bundle first, then by `h`.
pub fn manifest_for<F: Scalar>(bundles: &[Layer1Bundle<F>]) -> Vec<(usize, ColumnTag)> {
    let mut order: Vec<usize> = (0..bundles.len()).collect();
    order.sort_by_key(|&b| bundles[b].label_kind != LabelKind::Binary);
    order
        .into_iter()
        .flat_map(|b| {
            (0..bundles[b].h()).map(move |h| {
                (
                    b,
                    ColumnTag {
                        label_kind: bundles[b].label_kind,
                        h,
                    },
                )
            })
        })
        .collect()
}

/// Concatenates the bundles' out-of-fold columns into the layer-2 matrix.
pub fn assemble_md<F: Scalar>(bundles: &[Layer1Bundle<F>], labels: &[u8]) -> Result<Layer2Data<F>, TrainError> {
    for b in bundles {
        for col in &b.md_columns {
            if col.len() != labels.len() {
                return Err(DataError::LengthMismatch {
                    what: "layer-1 prediction column",
                    expected: labels.len(),
                    found: col.len(),
                }
                .into());
            }
        }
        if b.md_columns.len() != b.h() {
            return Err(TrainError::InvalidParameter(format!(
                "{} bundle has {} columns for {} models",
                b.label_kind.as_str(),
                b.md_columns.len(),
                b.h()
            )));
        }
    }
    let manifest = manifest_for(bundles);
    Ok(Layer2Data {
        columns: manifest
            .iter()
            .map(|&(b, t)| bundles[b].md_columns[t.h].clone())
            .collect(),
        labels: labels.to_vec(),
        manifest: manifest.into_iter().map(|(_, t)| t).collect(),
    })
}

/// The selected layer-2 candidate and everything needed to apply it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "F: Scalar", deserialize = "F: Scalar"))]
pub struct Layer2Fit<F: Scalar> {
    pub candidates: Vec<ElasticNetParams>,
    pub selected: usize,
    /// The selected candidate fitted on every `MD^(-k)`.
    pub fold_models: Vec<ElasticNetModel<F>>,
    /// The selected candidate fitted on all of MD.
    pub refit: ElasticNetModel<F>,
    #[serde(skip)]
    pub cv: Option<CvScore>,
}

/// Fits every candidate on each `MD^(-k)`, scores it on `MD_k`, and keeps the
/// candidate with the best mean score (lowest index on ties).
pub fn train_layer2<F: Scalar>(
    md: &Layer2Data<F>,
    folds: &FoldAssignment,
    candidates: &[ElasticNetParams],
    metric: MetricSpec,
) -> Result<Layer2Fit<F>, TrainError> {
    if candidates.is_empty() {
        return Err(TrainError::InvalidParameter("H must be at least 1".into()));
    }
    if folds.n_rows() != md.n_rows() {
        return Err(DataError::LengthMismatch {
            what: "fold assignment",
            expected: md.n_rows(),
            found: folds.n_rows(),
        }
        .into());
    }
    let k = folds.k();
    let splits: Vec<_> = (0..k)
        .map(|f| (md.rows(&folds.train_indices(f)), md.rows(&folds.valid_indices(f))))
        .collect();
    let jobs: Vec<(usize, usize)> = (0..candidates.len())
        .flat_map(|c| (0..k).map(move |f| (c, f)))
        .collect();
    let fits: Vec<(ElasticNetModel<F>, f64)> = jobs
        .par_iter()
        .map(|&(c, f)| {
            let ((tx, ty), (vx, vy)) = &splits[f];
            let model = fit_elastic_net(tx, ty, &candidates[c])?;
            let score = metric.evaluate(&model.predict_proba(vx)?, vy)?.as_f64();
            Ok((model, score))
        })
        .collect::<Result<_, TrainError>>()?;

    let mut scores = vec![vec![0.0; k]; candidates.len()];
    let mut models: Vec<Vec<ElasticNetModel<F>>> = vec![Vec::with_capacity(k); candidates.len()];
    for ((c, f), (m, s)) in jobs.into_iter().zip(fits) {
        scores[c][f] = s;
        models[c].push(m);
    }
    let cv = CvScore { metric, folds: scores };
    let selected = cv.best().unwrap_or(0);
    let refit = fit_elastic_net(&md.columns, &md.labels, &candidates[selected])?;
    Ok(Layer2Fit {
        candidates: candidates.to_vec(),
        selected,
        fold_models: models.swap_remove(selected),
        refit,
        cv: Some(cv),
    })
}
