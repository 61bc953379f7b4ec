//! SVMLight / LibSVM text format.
//!
//! ```text
//! <label> <idx>:<val> <idx>:<val> ... [# row id]
//! ```
//!
//! Lines starting with `#` and blank lines are skipped. Indices are 0-based
//! unless [`SvmLightOptions::one_based`] is set. A trailing `# comment` is kept
//! as the row id.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::DataError;
use crate::scalar::Scalar;

use super::{LabelKind, SparseDataset, SparseRow};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SvmLightOptions {
    pub one_based: bool,
    /// Declared column count; defaults to max index + 1.
    pub n_cols: Option<usize>,
}

pub fn load_svmlight<F: Scalar>(
    path: impl AsRef<Path>,
    expect_label: LabelKind,
    opts: SvmLightOptions,
) -> Result<SparseDataset<F>, DataError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| DataError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_svmlight(BufReader::new(file), expect_label, opts)
}

pub fn parse_svmlight<F: Scalar, R: BufRead>(
    reader: R,
    expect_label: LabelKind,
    opts: SvmLightOptions,
) -> Result<SparseDataset<F>, DataError> {
    let mut rows: Vec<SparseRow<F>> = Vec::new();
    let mut labels: Vec<f64> = Vec::new();
    let mut ids: Vec<Option<String>> = Vec::new();
    let mut max_col = 0usize;

    for (lineno, line) in reader.lines().enumerate() {
        let line_no = lineno + 1;
        let line = line.map_err(|e| DataError::Parse {
            line: line_no,
            msg: e.to_string(),
        })?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (body, comment) = match trimmed.split_once('#') {
            Some((b, c)) => (b, Some(c.trim().to_string())),
            None => (trimmed, None),
        };
        let mut tokens = body.split_whitespace();
        let label_tok = tokens.next().ok_or_else(|| DataError::Parse {
            line: line_no,
            msg: "missing label".into(),
        })?;
        let label: f64 = label_tok.parse().map_err(|_| DataError::Parse {
            line: line_no,
            msg: format!("bad label `{label_tok}`"),
        })?;
        if !label.is_finite() {
            return Err(DataError::Parse {
                line: line_no,
                msg: format!("non-finite label `{label_tok}`"),
            });
        }
        if expect_label == LabelKind::Binary && label != 0.0 && label != 1.0 {
            return Err(DataError::NonBinaryLabel {
                value: label,
                line: line_no,
            });
        }

        let mut row: SparseRow<F> = Vec::new();
        for tok in tokens {
            let (idx_s, val_s) = tok.split_once(':').ok_or_else(|| DataError::Parse {
                line: line_no,
                msg: format!("expected idx:value, found `{tok}`"),
            })?;
            let raw_idx: u64 = idx_s.parse().map_err(|_| DataError::Parse {
                line: line_no,
                msg: format!("bad feature index `{idx_s}`"),
            })?;
            let idx = if opts.one_based {
                raw_idx.checked_sub(1).ok_or_else(|| DataError::Parse {
                    line: line_no,
                    msg: "feature index 0 in a 1-based file".into(),
                })?
            } else {
                raw_idx
            };
            let idx = u32::try_from(idx).map_err(|_| DataError::Parse {
                line: line_no,
                msg: format!("feature index {raw_idx} too large"),
            })?;
            let val: f64 = val_s.parse().map_err(|_| DataError::Parse {
                line: line_no,
                msg: format!("bad feature value `{val_s}`"),
            })?;
            if !val.is_finite() {
                return Err(DataError::Parse {
                    line: line_no,
                    msg: format!("non-finite value for feature {raw_idx}"),
                });
            }
            row.push((idx, F::of(val)));
        }
        row.sort_by_key(|&(i, _)| i);
        if let Some(w) = row.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(DataError::Parse {
                line: line_no,
                msg: format!("duplicate feature index {}", w[0].0),
            });
        }
        if let Some(&(i, _)) = row.last() {
            max_col = max_col.max(i as usize + 1);
        }
        rows.push(row);
        labels.push(label);
        ids.push(comment.filter(|c| !c.is_empty()));
    }

    if rows.is_empty() {
        return Err(DataError::NoRows);
    }
    let n_cols = match opts.n_cols {
        Some(c) if c < max_col => {
            return Err(DataError::WidthMismatch {
                expected: c,
                found: max_col,
            })
        }
        Some(c) => c,
        None => max_col,
    };
    let mut ds = SparseDataset::new(n_cols, rows)?;
    ds = match expect_label {
        LabelKind::Binary => ds.with_binary_labels(labels.iter().map(|&y| y as u8).collect())?,
        LabelKind::Continuous => ds.with_continuous_labels(labels.iter().map(|&y| F::of(y)).collect())?,
    };
    if ids.iter().all(Option::is_some) {
        ds = ds.with_row_ids(ids.into_iter().map(Option::unwrap).collect())?;
    }
    Ok(ds)
}

/// Writes `ds` with the `label` vector in SVMLight format.
///
/// Values use the shortest round-trip representation, so reloading yields
/// identical rows and labels.
pub fn write_svmlight<F: Scalar, W: Write>(
    ds: &SparseDataset<F>,
    label: LabelKind,
    one_based: bool,
    mut out: W,
) -> Result<(), DataError> {
    let labels = ds
        .labels_as_scalar(label)
        .ok_or_else(|| DataError::Invalid(format!("dataset has no {} labels", label.as_str())))?;
    let offset = one_based as u32;
    let io_err = |e: std::io::Error| DataError::Invalid(format!("write failed: {e}"));
    for (i, row) in ds.rows().iter().enumerate() {
        write!(out, "{}", labels[i]).map_err(io_err)?;
        for &(idx, v) in row {
            write!(out, " {}:{}", idx + offset, v).map_err(io_err)?;
        }
        if let Some(ids) = ds.row_ids() {
            write!(out, " # {}", ids[i]).map_err(io_err)?;
        }
        writeln!(out).map_err(io_err)?;
    }
    Ok(())
}
