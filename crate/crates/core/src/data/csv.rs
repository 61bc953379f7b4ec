//! Dense CSV ingestion with a header row. Cells equal to 0 are dropped from the
//! sparse rows.

use std::io::Read;
use std::path::Path;

use crate::error::DataError;
use crate::scalar::Scalar;

use super::{LabelKind, SparseDataset, SparseRow};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvOptions {
    /// Label column; `None` loads features only.
    pub label_column: Option<String>,
    pub label_kind: LabelKind,
    /// Feature columns in order; `None` uses every other column.
    pub feature_columns: Option<Vec<String>>,
    pub id_column: Option<String>,
}

impl CsvOptions {
    pub fn with_label(label_column: impl Into<String>, label_kind: LabelKind) -> Self {
        CsvOptions {
            label_column: Some(label_column.into()),
            label_kind,
            feature_columns: None,
            id_column: None,
        }
    }
}

pub fn load_csv<F: Scalar>(path: impl AsRef<Path>, opts: &CsvOptions) -> Result<SparseDataset<F>, DataError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| DataError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_csv(file, opts)
}

pub(crate) fn read_csv<F: Scalar, R: Read>(reader: R, opts: &CsvOptions) -> Result<SparseDataset<F>, DataError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers: Vec<String> = rdr
        .headers()
        .map_err(|e| DataError::Parse {
            line: 1,
            msg: e.to_string(),
        })?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| DataError::MissingColumn(name.to_string()))
    };
    let label_pos = opts.label_column.as_deref().map(find).transpose()?;
    let id_pos = opts.id_column.as_deref().map(find).transpose()?;
    let feature_pos: Vec<usize> = match &opts.feature_columns {
        Some(cols) => cols.iter().map(|c| find(c)).collect::<Result<_, _>>()?,
        None => (0..headers.len())
            .filter(|&i| Some(i) != label_pos && Some(i) != id_pos)
            .collect(),
    };

    let mut rows: Vec<SparseRow<F>> = Vec::new();
    let mut labels: Vec<f64> = Vec::new();
    let mut ids: Vec<String> = Vec::new();
    for (r, record) in rdr.records().enumerate() {
        let line = r + 2;
        let record = record.map_err(|e| DataError::Parse {
            line,
            msg: e.to_string(),
        })?;
        let cell = |i: usize| -> Result<f64, DataError> {
            let raw = record.get(i).unwrap_or("").trim();
            let v: f64 = raw.parse().map_err(|_| DataError::Parse {
                line,
                msg: format!("non-numeric cell `{raw}` in column `{}`", headers[i]),
            })?;
            if v.is_nan() || v.is_infinite() {
                return Err(DataError::Parse {
                    line,
                    msg: format!("non-finite cell in column `{}`", headers[i]),
                });
            }
            Ok(v)
        };
        let mut row = Vec::new();
        for (j, &pos) in feature_pos.iter().enumerate() {
            let v = cell(pos)?;
            if v != 0.0 {
                row.push((j as u32, F::of(v)));
            }
        }
        if let Some(lp) = label_pos {
            let y = cell(lp)?;
            if opts.label_kind == LabelKind::Binary && y != 0.0 && y != 1.0 {
                return Err(DataError::NonBinaryLabel { value: y, line });
            }
            labels.push(y);
        }
        if let Some(ip) = id_pos {
            ids.push(record.get(ip).unwrap_or("").to_string());
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(DataError::NoRows);
    }
    let mut ds = SparseDataset::new(feature_pos.len(), rows)?;
    if label_pos.is_some() {
        ds = match opts.label_kind {
            LabelKind::Binary => ds.with_binary_labels(labels.iter().map(|&y| y as u8).collect())?,
            LabelKind::Continuous => ds.with_continuous_labels(labels.iter().map(|&y| F::of(y)).collect())?,
        };
    }
    if id_pos.is_some() {
        ds = ds.with_row_ids(ids)?;
    }
    Ok(ds)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_cells_are_dropped() {
        let text = "a,b,y\n1,2,1\n0,3,0\n4,5,1\n";
        let ds: SparseDataset<f64> =
            read_csv(text.as_bytes(), &CsvOptions::with_label("y", LabelKind::Binary)).unwrap();
        assert_eq!(ds.n_rows(), 3);
        assert_eq!(ds.n_cols(), 2);
        assert_eq!(ds.row(1), &[(1, 3.0)]);
        assert_eq!(ds.binary_labels().unwrap(), &[1, 0, 1]);
    }

    #[test]
    fn missing_label_column_is_named() {
        let err = read_csv::<f64, _>(
            "a,b\n1,2\n".as_bytes(),
            &CsvOptions::with_label("activity", LabelKind::Continuous),
        )
        .unwrap_err();
        assert!(err.to_string().contains("activity"), "{err}");
    }

    #[test]
    fn all_zero_features_give_empty_rows() {
        let ds: SparseDataset<f64> = read_csv(
            "a,b,y\n0,0,1.5\n0,0,2\n".as_bytes(),
            &CsvOptions::with_label("y", LabelKind::Continuous),
        )
        .unwrap();
        assert_eq!(ds.n_rows(), 2);
        assert!(ds.rows().iter().all(|r| r.is_empty()));
    }

    #[test]
    fn non_numeric_cell_errors() {
        let err =
            read_csv::<f64, _>("a,y\nx,1\n".as_bytes(), &CsvOptions::with_label("y", LabelKind::Binary)).unwrap_err();
        assert!(matches!(err, DataError::Parse { line: 2, .. }));
    }

    #[test]
    fn explicit_feature_and_id_columns() {
        let opts = CsvOptions {
            label_column: Some("y".into()),
            label_kind: LabelKind::Continuous,
            feature_columns: Some(vec!["c".into(), "a".into()]),
            id_column: Some("id".into()),
        };
        let ds: SparseDataset<f64> = read_csv("id,a,c,y\nm1,1,0,0.5\nm2,0,2,1\n".as_bytes(), &opts).unwrap();
        assert_eq!(ds.row(0), &[(1, 1.0)]);
        assert_eq!(ds.row(1), &[(0, 2.0)]);
        assert_eq!(ds.row_id(1), "m2");
    }
}
