use crate::scalar::Scalar;

use super::SparseDataset;

/// Column-major view of a dataset: for every feature, the present
/// `(row, value)` entries sorted by value then row.
#[derive(Debug, Clone)]
pub struct ColumnMatrix<F> {
    n_rows: usize,
    cols: Vec<Vec<(u32, F)>>,
}

impl<F: Scalar> ColumnMatrix<F> {
    pub fn from_dataset(ds: &SparseDataset<F>) -> Self {
        let mut cols: Vec<Vec<(u32, F)>> = vec![Vec::new(); ds.n_cols()];
        for (r, row) in ds.rows().iter().enumerate() {
            for &(j, v) in row {
                cols[j as usize].push((r as u32, v));
            }
        }
        for col in &mut cols {
            col.sort_by(|a, b| a.1.partial_cmp(&b.1).expect("finite values").then(a.0.cmp(&b.0)));
        }
        ColumnMatrix {
            n_rows: ds.n_rows(),
            cols,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.cols.len()
    }

    pub fn column(&self, j: usize) -> &[(u32, F)] {
        &self.cols[j]
    }
}
