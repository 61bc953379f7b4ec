use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::DataError;
use crate::seed::rng_for;

/// Assignment of every row to one of `k` folds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldAssignment {
    k: usize,
    fold_of_row: Vec<usize>,
}

impl FoldAssignment {
    pub fn from_vec(k: usize, fold_of_row: Vec<usize>) -> Result<Self, DataError> {
        if k < 2 {
            return Err(DataError::Invalid(format!("need at least 2 folds, got {k}")));
        }
        let mut sizes = vec![0usize; k];
        for &f in &fold_of_row {
            if f >= k {
                return Err(DataError::Invalid(format!("fold index {f} out of range for {k} folds")));
            }
            sizes[f] += 1;
        }
        if sizes.contains(&0) {
            return Err(DataError::Invalid("every fold must be non-empty".into()));
        }
        Ok(FoldAssignment { k, fold_of_row })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n_rows(&self) -> usize {
        self.fold_of_row.len()
    }

    pub fn fold_of_row(&self) -> &[usize] {
        &self.fold_of_row
    }

    /// Rows of fold `k` (the validation part `D_k`), ascending.
    pub fn valid_indices(&self, k: usize) -> Vec<usize> {
        (0..self.fold_of_row.len())
            .filter(|&i| self.fold_of_row[i] == k)
            .collect()
    }

    /// Rows outside fold `k` (the training part), ascending.
    pub fn train_indices(&self, k: usize) -> Vec<usize> {
        (0..self.fold_of_row.len())
            .filter(|&i| self.fold_of_row[i] != k)
            .collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.fold_of_row {
            sizes[f] += 1;
        }
        sizes
    }
}

fn class_indices(labels: &[u8]) -> (Vec<usize>, Vec<usize>) {
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for (i, &y) in labels.iter().enumerate() {
        if y == 1 {
            pos.push(i)
        } else {
            neg.push(i)
        }
    }
    (pos, neg)
}

/// Stratified K-fold split.
///
/// Each class is shuffled with a seeded PRNG and dealt round-robin; negatives
/// continue the deal where positives stopped, so both per-class and total fold
/// sizes differ by at most one.
pub fn stratified_kfold(labels: &[u8], k: usize, seed: u64) -> Result<FoldAssignment, DataError> {
    if k < 2 {
        return Err(DataError::Invalid(format!("need at least 2 folds, got {k}")));
    }
    if k > labels.len() {
        return Err(DataError::Invalid(format!(
            "{k} folds requested for {} rows",
            labels.len()
        )));
    }
    let (mut pos, mut neg) = class_indices(labels);
    if pos.is_empty() {
        return Err(DataError::Invalid("cannot stratify: no positive labels".into()));
    }
    if neg.is_empty() {
        return Err(DataError::Invalid("cannot stratify: no negative labels".into()));
    }
    let mut rng = rng_for(seed, &[0x5f01d]);
    pos.shuffle(&mut rng);
    neg.shuffle(&mut rng);
    let mut fold_of_row = vec![0; labels.len()];
    for (slot, &row) in pos.iter().chain(neg.iter()).enumerate() {
        fold_of_row[row] = slot % k;
    }
    FoldAssignment::from_vec(k, fold_of_row)
}

/// Stratified train/test split; returns `(train, test)` row indices, ascending.
///
/// Each class contributes `round(fraction * class_count)` rows to the test part.
pub fn stratified_holdout(labels: &[u8], fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>), DataError> {
    if !(0.0..1.0).contains(&fraction) {
        return Err(DataError::Invalid(format!("test fraction {fraction} outside [0, 1)")));
    }
    let (mut pos, mut neg) = class_indices(labels);
    let mut rng = rng_for(seed, &[0x7e57]);
    pos.shuffle(&mut rng);
    neg.shuffle(&mut rng);
    let mut test = Vec::new();
    let mut train = Vec::new();
    for class in [pos, neg] {
        let n_test = (fraction * class.len() as f64).round() as usize;
        test.extend_from_slice(&class[..n_test]);
        train.extend_from_slice(&class[n_test..]);
    }
    test.sort_unstable();
    train.sort_unstable();
    Ok((train, test))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(n: usize, n_pos: usize) -> Vec<u8> {
        (0..n)
            .map(|i| (i % (n / n_pos) == 0 && i / (n / n_pos) < n_pos) as u8)
            .collect()
    }

    fn positives_per_fold(f: &FoldAssignment, y: &[u8]) -> Vec<usize> {
        let mut c = vec![0; f.k()];
        for (i, &fo) in f.fold_of_row().iter().enumerate() {
            c[fo] += y[i] as usize;
        }
        c
    }

    #[test]
    fn hundred_rows_ten_positives_five_folds() {
        let y = labels(100, 10);
        assert_eq!(y.iter().filter(|&&v| v == 1).count(), 10);
        let f = stratified_kfold(&y, 5, 3).unwrap();
        assert_eq!(f.fold_sizes(), vec![20; 5]);
        assert_eq!(positives_per_fold(&f, &y), vec![2; 5]);
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let y = labels(100, 10);
        assert_eq!(stratified_kfold(&y, 5, 9).unwrap(), stratified_kfold(&y, 5, 9).unwrap());
        assert_ne!(
            stratified_kfold(&y, 5, 9).unwrap(),
            stratified_kfold(&y, 5, 10).unwrap()
        );
    }

    #[test]
    fn three_positives_over_five_folds() {
        let mut y = vec![0u8; 40];
        y[3] = 1;
        y[17] = 1;
        y[31] = 1;
        let f = stratified_kfold(&y, 5, 1).unwrap();
        let mut c = positives_per_fold(&f, &y);
        c.sort_unstable();
        assert_eq!(c, vec![0, 0, 1, 1, 1]);
        let sizes = f.fold_sizes();
        assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
    }

    #[test]
    fn errors() {
        assert!(stratified_kfold(&[0, 0, 0], 2, 0).is_err());
        assert!(stratified_kfold(&[1, 1, 1], 2, 0).is_err());
        assert!(stratified_kfold(&[1, 0], 3, 0).is_err());
        assert!(stratified_kfold(&[1, 0], 1, 0).is_err());
    }

    #[test]
    fn train_and_valid_partition_rows() {
        let y = labels(50, 5);
        let f = stratified_kfold(&y, 4, 2).unwrap();
        let mut all: Vec<usize> = (0..4).flat_map(|k| f.valid_indices(k)).collect();
        all.sort_unstable();
        assert_eq!(all, (0..50).collect::<Vec<_>>());
        for k in 0..4 {
            assert_eq!(f.train_indices(k).len() + f.valid_indices(k).len(), 50);
        }
    }

    #[test]
    fn holdout_is_stratified() {
        let y = labels(200, 20);
        let (train, test) = stratified_holdout(&y, 0.1, 4).unwrap();
        assert_eq!(test.len(), 20);
        assert_eq!(train.len(), 180);
        assert_eq!(test.iter().filter(|&&i| y[i] == 1).count(), 2);
    }

    proptest::proptest! {
        #[test]
        fn stratification_bounds_hold(n in 4usize..300, pos_frac in 0.01f64..0.99, k in 2usize..8, seed in 0u64..1000) {
            let n_pos = ((n as f64 * pos_frac) as usize).clamp(1, n - 1);
            let y: Vec<u8> = (0..n).map(|i| (i < n_pos) as u8).collect();
            proptest::prop_assume!(k <= n);
            let f = stratified_kfold(&y, k, seed).unwrap();
            let sizes = f.fold_sizes();
            proptest::prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
            let c = positives_per_fold(&f, &y);
            proptest::prop_assert!(c.iter().max().unwrap() - c.iter().min().unwrap() <= 1);
            proptest::prop_assert_eq!(sizes.iter().sum::<usize>(), n);
        }
    }
}
