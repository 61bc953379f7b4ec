//! Sparse datasets, label mappings, fold assignment and file ingestion.

mod column;
mod csv;
mod folds;
mod labels;
mod svmlight;

pub use self::column::ColumnMatrix;
pub use self::csv::{load_csv, CsvOptions};
pub use self::folds::{stratified_holdout, stratified_kfold, FoldAssignment};
pub use self::labels::{binarize, Direction, LabelMapping};
pub use self::svmlight::{load_svmlight, parse_svmlight, write_svmlight, SvmLightOptions};

use serde::{Deserialize, Serialize};

use crate::error::DataError;
use crate::scalar::Scalar;

/// Which label vector a file or model refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelKind {
    Binary,
    Continuous,
}

impl LabelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            LabelKind::Binary => "binary",
            LabelKind::Continuous => "continuous",
        }
    }
}

/// One sparse row: `(feature_index, value)` pairs, indices strictly increasing.
pub type SparseRow<F> = Vec<(u32, F)>;

/// Row-sparse feature matrix with optional label vectors.
///
/// A feature missing from a row is *absent*: tree learners route it along the
/// split's default direction, linear learners treat it as 0.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseDataset<F> {
    n_cols: usize,
    rows: Vec<SparseRow<F>>,
    continuous_labels: Option<Vec<F>>,
    binary_labels: Option<Vec<u8>>,
    row_ids: Option<Vec<String>>,
}

impl<F: Scalar> SparseDataset<F> {
    /// Builds a dataset, checking index order, bounds and finiteness.
    pub fn new(n_cols: usize, rows: Vec<SparseRow<F>>) -> Result<Self, DataError> {
        for (r, row) in rows.iter().enumerate() {
            let mut prev: Option<u32> = None;
            for &(idx, v) in row {
                if idx as usize >= n_cols {
                    return Err(DataError::Invalid(format!(
                        "row {r}: feature index {idx} out of range for {n_cols} columns"
                    )));
                }
                if prev.is_some_and(|p| p >= idx) {
                    return Err(DataError::Invalid(format!(
                        "row {r}: feature indices not strictly increasing at {idx}"
                    )));
                }
                if !v.is_finite() {
                    return Err(DataError::Invalid(format!(
                        "row {r}: non-finite value for feature {idx}"
                    )));
                }
                prev = Some(idx);
            }
        }
        Ok(SparseDataset {
            n_cols,
            rows,
            continuous_labels: None,
            binary_labels: None,
            row_ids: None,
        })
    }

    pub fn with_binary_labels(mut self, labels: Vec<u8>) -> Result<Self, DataError> {
        self.check_len("binary labels", labels.len())?;
        if let Some(bad) = labels.iter().find(|&&y| y > 1) {
            return Err(DataError::Invalid(format!("binary label {bad} is not 0 or 1")));
        }
        self.binary_labels = Some(labels);
        Ok(self)
    }

    pub fn with_continuous_labels(mut self, labels: Vec<F>) -> Result<Self, DataError> {
        self.check_len("continuous labels", labels.len())?;
        if labels.iter().any(|y| !y.is_finite()) {
            return Err(DataError::Invalid("continuous labels must be finite".into()));
        }
        self.continuous_labels = Some(labels);
        Ok(self)
    }

    pub fn with_row_ids(mut self, ids: Vec<String>) -> Result<Self, DataError> {
        self.check_len("row ids", ids.len())?;
        self.row_ids = Some(ids);
        Ok(self)
    }

    fn check_len(&self, what: &'static str, found: usize) -> Result<(), DataError> {
        if found != self.rows.len() {
            return Err(DataError::LengthMismatch {
                what,
                expected: self.rows.len(),
                found,
            });
        }
        Ok(())
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn rows(&self) -> &[SparseRow<F>] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &[(u32, F)] {
        &self.rows[i]
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn binary_labels(&self) -> Option<&[u8]> {
        self.binary_labels.as_deref()
    }

    pub fn continuous_labels(&self) -> Option<&[F]> {
        self.continuous_labels.as_deref()
    }

    pub fn row_ids(&self) -> Option<&[String]> {
        self.row_ids.as_deref()
    }

    /// Identifier for row `i`: the stored id, or the row index.
    pub fn row_id(&self, i: usize) -> String {
        match &self.row_ids {
            Some(ids) => ids[i].clone(),
            None => i.to_string(),
        }
    }

    /// Widens the declared column count (e.g. to match a training set).
    pub fn set_n_cols(&mut self, n_cols: usize) -> Result<(), DataError> {
        let max = self
            .rows
            .iter()
            .filter_map(|r| r.last().map(|&(i, _)| i as usize + 1))
            .max()
            .unwrap_or(0);
        if n_cols < max {
            return Err(DataError::WidthMismatch {
                expected: n_cols,
                found: max,
            });
        }
        self.n_cols = n_cols;
        Ok(())
    }

    /// Labels for `kind`, as reals.
    pub fn labels_as_scalar(&self, kind: LabelKind) -> Option<Vec<F>> {
        match kind {
            LabelKind::Binary => self
                .binary_labels
                .as_ref()
                .map(|l| l.iter().map(|&y| F::of(y as f64)).collect()),
            LabelKind::Continuous => self.continuous_labels.clone(),
        }
    }

    /// Value of `feature` in row `i`, or `None` when absent.
    pub fn value(&self, i: usize, feature: u32) -> Option<F> {
        lookup(&self.rows[i], feature)
    }

    /// Rows selected by `indices`, in that order, with their labels and ids.
    pub fn subset(&self, indices: &[usize]) -> Self {
        fn pick<T: Copy>(indices: &[usize]) -> impl Fn(&Vec<T>) -> Vec<T> + '_ {
            move |v| indices.iter().map(|&i| v[i]).collect()
        }
        SparseDataset {
            n_cols: self.n_cols,
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            continuous_labels: self.continuous_labels.as_ref().map(pick(indices)),
            binary_labels: self.binary_labels.as_ref().map(pick(indices)),
            row_ids: self
                .row_ids
                .as_ref()
                .map(|ids| indices.iter().map(|&i| ids[i].clone()).collect()),
        }
    }
}

/// Binary search for `feature` in a sorted sparse row.
#[inline]
pub fn lookup<F: Copy>(row: &[(u32, F)], feature: u32) -> Option<F> {
    row.binary_search_by_key(&feature, |&(i, _)| i).ok().map(|p| row[p].1)
}
