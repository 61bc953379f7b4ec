use serde::{Deserialize, Serialize};

use crate::error::MetricError;
use crate::scalar::Scalar;

use super::check_inputs;

pub const LOGLOSS_EPS: f64 = 1e-15;

fn check_probabilities<F: Scalar>(scores: &[F]) -> Result<(), MetricError> {
    match scores.iter().find(|&&s| s < F::zero() || s > F::one()) {
        Some(&s) => Err(MetricError::ScoreOutOfRange(s.as_f64())),
        None => Ok(()),
    }
}

/// Summed logistic loss with scores clipped to `[eps, 1 - eps]`.
pub fn logloss<F: Scalar>(scores: &[F], labels: &[u8], eps: f64) -> Result<F, MetricError> {
    check_inputs(scores, labels)?;
    check_probabilities(scores)?;
    let lo = F::of(eps);
    let hi = F::one() - lo;
    Ok(scores
        .iter()
        .zip(labels)
        .map(|(&s, &y)| {
            let p = s.max(lo).min(hi);
            if y == 1 {
                -p.ln()
            } else {
                -(F::one() - p).ln()
            }
        })
        .sum())
}

/// [`logloss`] divided by the number of records.
pub fn logloss_mean<F: Scalar>(scores: &[F], labels: &[u8], eps: f64) -> Result<F, MetricError> {
    let total = logloss(scores, labels, eps)?;
    Ok(total / F::of(labels.len().max(1) as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityBin<F> {
    pub mean_predicted: F,
    pub positive_rate: F,
    pub count: usize,
}

/// Quantile-binned reliability diagram data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityBins<F> {
    pub bins: Vec<ReliabilityBin<F>>,
    pub overall_positive_rate: F,
}

/// Sorts records by ascending score (ties keep their input order) and cuts
/// them into `n_bins` contiguous groups whose sizes differ by at most one;
/// the remainder goes to the lowest-score bins.
pub fn reliability_bins<F: Scalar>(
    scores: &[F],
    labels: &[u8],
    n_bins: usize,
) -> Result<ReliabilityBins<F>, MetricError> {
    let n_pos = check_inputs(scores, labels)?;
    if n_bins == 0 {
        return Err(MetricError::InvalidParameter("n_bins must be positive".into()));
    }
    let n = scores.len();
    if n < n_bins {
        return Err(MetricError::TooFewRecords { n, bins: n_bins });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).expect("NaN checked"));
    let base = n / n_bins;
    let extra = n % n_bins;
    let mut bins = Vec::with_capacity(n_bins);
    let mut start = 0;
    for b in 0..n_bins {
        let size = base + usize::from(b < extra);
        let members = &order[start..start + size];
        let sum: F = members.iter().map(|&i| scores[i]).sum();
        let pos = members.iter().filter(|&&i| labels[i] == 1).count();
        bins.push(ReliabilityBin {
            mean_predicted: sum / F::of(size as f64),
            positive_rate: F::of(pos as f64 / size as f64),
            count: size,
        });
        start += size;
    }
    Ok(ReliabilityBins {
        bins,
        overall_positive_rate: F::of(n_pos as f64 / n as f64),
    })
}

/// Mean over quantile bins of `|mean_predicted - positive_rate|`, divided by
/// the overall positive rate. Lower is better calibrated.
pub fn reliability_score<F: Scalar>(scores: &[F], labels: &[u8], n_bins: usize) -> Result<F, MetricError> {
    let table = reliability_bins(scores, labels, n_bins)?;
    if table.overall_positive_rate == F::zero() {
        return Err(MetricError::NoPositives);
    }
    let total: F = table
        .bins
        .iter()
        .map(|b| (b.mean_predicted - b.positive_rate).abs())
        .sum();
    Ok(total / F::of(n_bins as f64) / table.overall_positive_rate)
}

/// Classical fixed-width reliability diagram over `[0,1]`, for comparison with
/// the quantile construction. Empty bins have `count == 0` and NaN means.
pub fn fixed_width_bins<F: Scalar>(
    scores: &[F],
    labels: &[u8],
    n_bins: usize,
) -> Result<ReliabilityBins<F>, MetricError> {
    let n_pos = check_inputs(scores, labels)?;
    check_probabilities(scores)?;
    if n_bins == 0 || scores.is_empty() {
        return Err(MetricError::InvalidParameter(
            "need records and a positive bin count".into(),
        ));
    }
    let mut sums = vec![(F::zero(), 0usize, 0usize); n_bins];
    for (&s, &y) in scores.iter().zip(labels) {
        let b = ((s.as_f64() * n_bins as f64) as usize).min(n_bins - 1);
        sums[b].0 += s;
        sums[b].1 += 1;
        sums[b].2 += y as usize;
    }
    let bins = sums
        .into_iter()
        .map(|(sum, count, pos)| ReliabilityBin {
            mean_predicted: if count == 0 {
                F::nan()
            } else {
                sum / F::of(count as f64)
            },
            positive_rate: if count == 0 {
                F::nan()
            } else {
                F::of(pos as f64 / count as f64)
            },
            count,
        })
        .collect();
    Ok(ReliabilityBins {
        bins,
        overall_positive_rate: F::of(n_pos as f64 / scores.len() as f64),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn logloss_examples() {
        assert_abs_diff_eq!(
            logloss(&[0.5; 4], &[1, 0, 1, 0], LOGLOSS_EPS).unwrap(),
            2.772_588_722_239_781,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            logloss(&[0.8, 0.4], &[1, 0], LOGLOSS_EPS).unwrap(),
            0.733_969_175_080_200_4,
            epsilon = 1e-12
        );
        let exact = logloss(&[1.0, 0.0, 1.0, 0.0], &[1, 0, 1, 0], LOGLOSS_EPS).unwrap();
        assert!(exact <= 4.0 * LOGLOSS_EPS * (1.0 + 1e-3), "{exact}");
        assert_eq!(
            logloss(&[1.2], &[1], LOGLOSS_EPS),
            Err(MetricError::ScoreOutOfRange(1.2))
        );
        assert_abs_diff_eq!(
            logloss_mean(&[0.5; 4], &[1, 0, 1, 0], LOGLOSS_EPS).unwrap(),
            2f64.ln(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn bin_sizes() {
        let s: Vec<f64> = (0..20).map(|i| i as f64 / 20.0).collect();
        let t = reliability_bins(&s, &[0; 20], 10).unwrap();
        assert!(t.bins.iter().all(|b| b.count == 2));
        let s: Vec<f64> = (0..23).map(|i| i as f64 / 23.0).collect();
        let t = reliability_bins(&s, &[0; 23], 10).unwrap();
        let sizes: Vec<usize> = t.bins.iter().map(|b| b.count).collect();
        assert_eq!(sizes, vec![3, 3, 3, 2, 2, 2, 2, 2, 2, 2]);
        assert_eq!(
            reliability_bins(&s[..5], &[0; 5], 10),
            Err(MetricError::TooFewRecords { n: 5, bins: 10 })
        );
    }

    #[test]
    fn constant_scores() {
        let y: Vec<u8> = (0..30).map(|i| (i % 10 < 3) as u8).collect();
        let t = reliability_bins(&[0.3; 30], &y, 10).unwrap();
        assert_eq!(t.bins.iter().map(|b| b.count).sum::<usize>(), 30);
        assert!(t.bins.iter().all(|b| b.mean_predicted == 0.3));
    }

    #[test]
    fn perfectly_calibrated_bins_score_zero() {
        // Each bin of 4 holds scores averaging its positive rate.
        let s = [0.0, 0.0, 0.0, 0.0, 0.2, 0.3, 0.2, 0.3, 0.5, 0.5, 0.5, 0.5];
        let y = [0, 0, 0, 0, 1, 0, 0, 0, 1, 0, 1, 0];
        assert_abs_diff_eq!(reliability_score(&s, &y, 3).unwrap(), 0.0, epsilon = 1e-15);
        let y: Vec<u8> = (0..40).map(|i| (i % 4 == 0) as u8).collect();
        assert_abs_diff_eq!(reliability_score(&[0.25; 40], &y, 10).unwrap(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn twenty_row_worked_example() {
        let s: Vec<f64> = (1..=20).map(|i| 0.05 * i as f64).collect();
        let mut y = [0u8; 20];
        y[16] = 1;
        y[18] = 1;
        assert_abs_diff_eq!(reliability_score(&s, &y, 10).unwrap(), 4.25, epsilon = 1e-12);
    }

    #[test]
    fn zero_positives_is_an_error() {
        assert_eq!(
            reliability_score(&[0.1; 10], &[0; 10], 10),
            Err(MetricError::NoPositives)
        );
    }

    #[test]
    fn fixed_width_leaves_empty_bins() {
        let t = fixed_width_bins(&[0.01f64, 0.02, 0.95], &[0, 0, 1], 10).unwrap();
        assert_eq!(t.bins[0].count, 2);
        assert_eq!(t.bins[9].count, 1);
        assert_eq!(t.bins[5].count, 0);
        assert!(t.bins[5].mean_predicted.is_nan());
    }
}
