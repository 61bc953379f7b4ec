use serde::{Deserialize, Serialize};

use crate::error::DataError;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    #[default]
    GreaterIsPositive,
    LessIsPositive,
}

/// Threshold map from a continuous activity value to a binary label.
///
/// The comparison is strict: a value exactly equal to the threshold is
/// negative in both directions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabelMapping {
    pub threshold: f64,
    #[serde(default)]
    pub direction: Direction,
}

impl LabelMapping {
    pub fn new(threshold: f64, direction: Direction) -> Result<Self, DataError> {
        if !threshold.is_finite() {
            return Err(DataError::Invalid(format!("label threshold {threshold} is not finite")));
        }
        Ok(LabelMapping { threshold, direction })
    }

    pub fn greater(threshold: f64) -> Self {
        LabelMapping {
            threshold,
            direction: Direction::GreaterIsPositive,
        }
    }

    pub fn apply<F: Scalar>(&self, value: F) -> u8 {
        let v = value.as_f64();
        let positive = match self.direction {
            Direction::GreaterIsPositive => v > self.threshold,
            Direction::LessIsPositive => v < self.threshold,
        };
        positive as u8
    }
}

/// Maps continuous labels to `{0, 1}` through `mapping`.
pub fn binarize<F: Scalar>(labels: &[F], mapping: &LabelMapping) -> Result<Vec<u8>, DataError> {
    labels
        .iter()
        .enumerate()
        .map(|(i, &y)| {
            if y.is_nan() {
                Err(DataError::Invalid(format!("NaN label at position {i}")))
            } else {
                Ok(mapping.apply(y))
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundary_value_is_negative() {
        let m = LabelMapping::greater(5.0);
        assert_eq!(binarize(&[5.1, 5.0, 4.9], &m).unwrap(), vec![1, 0, 0]);
    }

    #[test]
    fn empty_input_gives_empty_output() {
        assert!(binarize::<f64>(&[], &LabelMapping::greater(0.0)).unwrap().is_empty());
    }

    #[test]
    fn less_is_positive_mirrors() {
        let m = LabelMapping::new(-2.0, Direction::LessIsPositive).unwrap();
        assert_eq!(binarize(&[-1.0, -3.0], &m).unwrap(), vec![0, 1]);
        assert_eq!(binarize(&[-2.0], &m).unwrap(), vec![0]);
    }

    #[test]
    fn nan_is_rejected() {
        assert!(binarize(&[f64::NAN], &LabelMapping::greater(0.0)).is_err());
        assert!(LabelMapping::new(f64::INFINITY, Direction::GreaterIsPositive).is_err());
    }

    #[test]
    fn binarize_is_idempotent_through_half_threshold() {
        let m = LabelMapping::greater(0.3);
        let once = binarize(&[0.1, 0.5, 0.3, 0.9], &m).unwrap();
        let as_f: Vec<f64> = once.iter().map(|&y| y as f64).collect();
        let twice = binarize(&as_f, &LabelMapping::greater(0.5)).unwrap();
        assert_eq!(once, twice);
    }
}
