use serde::{Deserialize, Serialize};

use crate::data::{FoldAssignment, LabelMapping, SparseDataset};
use crate::error::{DataError, TrainError};
use crate::scalar::Scalar;

use super::layer1::Layer1Bundle;
use super::layer2::{manifest_for, ColumnTag, Layer2Fit};

/// How the layer-2 output is formed at prediction time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layer2Mode {
    /// Average of the K fold models' probabilities.
    #[default]
    FoldMean,
    /// The model refitted on all of MD.
    Refit,
}

/// A trained two-layer ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "F: Scalar", deserialize = "F: Scalar"))]
pub struct CbfModel<F: Scalar> {
    pub n_cols: usize,
    pub h: usize,
    pub seed: u64,
    pub label_mapping: Option<LabelMapping>,
    pub fold_assignment: FoldAssignment,
    pub bundles: Vec<Layer1Bundle<F>>,
    /// Layer-2 input columns in training order.
    pub manifest: Vec<ColumnTag>,
    pub layer2: Layer2Fit<F>,
    pub layer2_mode: Layer2Mode,
}

impl<F: Scalar> CbfModel<F> {
    /// Checks internal consistency, e.g. after loading from disk.
    pub fn validate(&self) -> Result<(), TrainError> {
        let expected: Vec<ColumnTag> = manifest_for(&self.bundles).into_iter().map(|(_, t)| t).collect();
        if expected != self.manifest {
            return Err(TrainError::InvalidParameter(
                "column manifest does not match the layer-1 bundles".into(),
            ));
        }
        let width = self.manifest.len();
        let models = self
            .layer2
            .fold_models
            .iter()
            .chain(std::iter::once(&self.layer2.refit));
        for m in models {
            if m.n_features() != width {
                return Err(TrainError::InvalidParameter(format!(
                    "layer-2 model expects {} inputs, manifest has {width}",
                    m.n_features()
                )));
            }
            if m.beta.iter().any(|b| !b.is_finite()) {
                return Err(TrainError::InvalidParameter("non-finite layer-2 coefficient".into()));
            }
        }
        for b in &self.bundles {
            if b.models.len() != b.h() || b.models.iter().any(|row| row.is_empty()) {
                return Err(TrainError::InvalidParameter("incomplete layer-1 model grid".into()));
            }
            if b.models.iter().flatten().any(|m| m.n_cols != self.n_cols) {
                return Err(TrainError::InvalidParameter(
                    "layer-1 model width differs from the ensemble".into(),
                ));
            }
        }
        Ok(())
    }

    /// Layer-2 inputs for new rows: each column is the fold-averaged output of
    /// one layer-1 model, in manifest order.
    pub fn predict_layer1(&self, data: &SparseDataset<F>) -> Result<Vec<Vec<F>>, TrainError> {
        if data.n_cols() != self.n_cols {
            return Err(DataError::WidthMismatch {
                expected: self.n_cols,
                found: data.n_cols(),
            }
            .into());
        }
        self.manifest
            .iter()
            .map(|tag| {
                let bundle = self
                    .bundles
                    .iter()
                    .find(|b| b.label_kind == tag.label_kind)
                    .ok_or_else(|| TrainError::InvalidParameter(format!("no {} bundle", tag.label_kind.as_str())))?;
                Ok(bundle.predict_model(tag.h, data)?)
            })
            .collect()
    }

    /// Applies layer 2 to precomputed layer-1 columns.
    pub fn predict_layer2(&self, columns: &[Vec<F>]) -> Result<Vec<F>, TrainError> {
        match self.layer2_mode {
            Layer2Mode::Refit => self.layer2.refit.predict_proba(columns),
            Layer2Mode::FoldMean => {
                let n = columns.first().map_or(0, Vec::len);
                let mut acc = vec![F::zero(); n];
                for m in &self.layer2.fold_models {
                    for (a, p) in acc.iter_mut().zip(m.predict_proba(columns)?) {
                        *a += p;
                    }
                }
                let k = F::of(self.layer2.fold_models.len() as f64);
                Ok(acc.into_iter().map(|a| a / k).collect())
            }
        }
    }

    /// Calibrated probability for each row of `data`.
    pub fn predict(&self, data: &SparseDataset<F>) -> Result<Vec<F>, TrainError> {
        let md = self.predict_layer1(data)?;
        if data.n_rows() == 0 {
            return Ok(Vec::new());
        }
        self.predict_layer2(&md)
    }
}
