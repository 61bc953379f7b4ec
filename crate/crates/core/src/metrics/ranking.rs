use std::cmp::Ordering;

use rand::seq::SliceRandom;

use crate::error::MetricError;
use crate::scalar::Scalar;
use crate::seed::rng_for;

use super::check_inputs;

/// Seed of the shuffle that orders tied scores in [`auc_bed`] and
/// [`enrichment_factor`].
pub const TIE_SEED: u64 = 0x7135_eed5;

pub const DEFAULT_BEDROC_ALPHA: f64 = 20.0;

fn desc<F: Scalar>(a: F, b: F) -> Ordering {
    b.partial_cmp(&a).unwrap_or(Ordering::Equal)
}

/// Row indices by descending score; tied rows keep the order of a seeded
/// shuffle, so outcomes under ties are deterministic.
fn shuffled_descending<F: Scalar>(scores: &[F], seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.shuffle(&mut rng_for(seed, &[scores.len() as u64]));
    order.sort_by(|&a, &b| desc(scores[a], scores[b]));
    order
}

/// Area under the ROC curve as the Mann-Whitney statistic with midranks:
/// `P(s_pos > s_neg) + P(s_pos = s_neg) / 2`.
pub fn auc_roc<F: Scalar>(scores: &[F], labels: &[u8]) -> Result<F, MetricError> {
    let n_pos = check_inputs(scores, labels)?;
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(MetricError::SingleClass);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| desc(scores[b], scores[a]));
    // Sum of 1-based midranks of the positives, ascending by score.
    let mut rank_sum = 0.0f64;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let midrank = (i + j) as f64 / 2.0 + 1.0;
        let pos_in_group = order[i..=j].iter().filter(|&&r| labels[r] == 1).count();
        rank_sum += midrank * pos_in_group as f64;
        i = j + 1;
    }
    let (p, q) = (n_pos as f64, n_neg as f64);
    Ok(F::of((rank_sum - p * (p + 1.0) / 2.0) / (p * q)))
}

/// Average precision: mean over positives of the precision at their rank,
/// with tied scores sharing the precision at the end of their group.
pub fn auc_prc<F: Scalar>(scores: &[F], labels: &[u8]) -> Result<F, MetricError> {
    let n_pos = check_inputs(scores, labels)?;
    if n_pos == 0 {
        return Err(MetricError::NoPositives);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| desc(scores[a], scores[b]));
    let mut ap = 0.0f64;
    let mut tp = 0usize;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let group_pos = order[i..=j].iter().filter(|&&r| labels[r] == 1).count();
        tp += group_pos;
        if group_pos > 0 {
            ap += group_pos as f64 * (tp as f64 / (j + 1) as f64);
        }
        i = j + 1;
    }
    Ok(F::of(ap / n_pos as f64))
}

/// BEDROC early-retrieval score with sharpness `alpha`.
///
/// With 1-based ranks `r_i` of the positives, `Ra = n_pos / N`:
///
/// ```text
/// RIE    = (Σ e^{-α r_i / N} / n_pos) / ((1/N) (1 - e^{-α}) / (e^{α/N} - 1))
/// BEDROC = RIE · Ra sinh(α/2) / (cosh(α/2) - cosh(α/2 - α Ra)) + 1 / (1 - e^{α(1 - Ra)})
/// ```
pub fn auc_bed<F: Scalar>(scores: &[F], labels: &[u8], alpha: f64) -> Result<F, MetricError> {
    auc_bed_with_seed(scores, labels, alpha, TIE_SEED)
}

pub fn auc_bed_with_seed<F: Scalar>(scores: &[F], labels: &[u8], alpha: f64, seed: u64) -> Result<F, MetricError> {
    let n_pos = check_inputs(scores, labels)?;
    if n_pos == 0 || n_pos == labels.len() {
        return Err(MetricError::SingleClass);
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(MetricError::InvalidParameter(format!(
            "BEDROC alpha must be > 0, got {alpha}"
        )));
    }
    let n = labels.len() as f64;
    let order = shuffled_descending(scores, seed);
    let exp_sum: f64 = order
        .iter()
        .enumerate()
        .filter(|(_, &r)| labels[r] == 1)
        .map(|(rank0, _)| (-alpha * (rank0 + 1) as f64 / n).exp())
        .sum();
    let ra = n_pos as f64 / n;
    let random_sum = (1.0 / n) * (1.0 - (-alpha).exp()) / ((alpha / n).exp() - 1.0);
    let rie = (exp_sum / n_pos as f64) / random_sum;
    let half = alpha / 2.0;
    let scale = ra * half.sinh() / (half.cosh() - (half - alpha * ra).cosh());
    let offset = 1.0 / (1.0 - (alpha * (1.0 - ra)).exp());
    Ok(F::of(rie * scale + offset))
}

/// Number of records in the top fraction `t` of `n`: `ceil(t * n)`, at least 1.
/// Products within 1e-9 of an integer are not rounded up.
pub fn top_count(t: f64, n: usize) -> usize {
    let x = t * n as f64;
    let nearest = x.round();
    let c = if (x - nearest).abs() < 1e-9 { nearest } else { x.ceil() };
    (c as usize).clamp(1, n.max(1))
}

/// Enrichment factor at fraction `t`: positive rate among the top
/// `ceil(t N)` records divided by the overall positive rate.
pub fn enrichment_factor<F: Scalar>(scores: &[F], labels: &[u8], t: f64) -> Result<F, MetricError> {
    enrichment_factor_with_seed(scores, labels, t, TIE_SEED)
}

pub fn enrichment_factor_with_seed<F: Scalar>(
    scores: &[F],
    labels: &[u8],
    t: f64,
    seed: u64,
) -> Result<F, MetricError> {
    let n_pos = check_inputs(scores, labels)?;
    if !(t > 0.0 && t < 1.0) {
        return Err(MetricError::InvalidParameter(format!(
            "EF fraction must be in (0, 1), got {t}"
        )));
    }
    if n_pos == 0 {
        return Err(MetricError::NoPositives);
    }
    let n = labels.len();
    let top = top_count(t, n);
    let order = shuffled_descending(scores, seed);
    let hits = order[..top].iter().filter(|&&r| labels[r] == 1).count();
    Ok(F::of((hits as f64 / top as f64) / (n_pos as f64 / n as f64)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn roc_examples() {
        let s = [0.9, 0.8, 0.3, 0.2];
        assert_eq!(auc_roc(&s, &[1, 1, 0, 0]).unwrap(), 1.0);
        assert_eq!(auc_roc(&s, &[1, 0, 1, 0]).unwrap(), 0.75);
        assert_eq!(auc_roc(&[0.4; 6], &[1, 0, 1, 0, 0, 0]).unwrap(), 0.5);
        assert_eq!(auc_roc(&s, &[1, 1, 1, 1]), Err(MetricError::SingleClass));
    }

    #[test]
    fn prc_examples() {
        assert_eq!(auc_prc(&[0.9, 0.8, 0.7], &[1, 1, 0]).unwrap(), 1.0);
        assert_eq!(auc_prc(&[0.9, 0.8, 0.7], &[0, 1, 0]).unwrap(), 0.5);
        assert_eq!(auc_prc(&[0.9, 0.8], &[0, 0]), Err(MetricError::NoPositives));
        // Tied group of two containing one positive: precision 1/2 shared.
        assert_eq!(auc_prc(&[0.5, 0.5, 0.1], &[1, 0, 0]).unwrap(), 0.5);
    }

    #[test]
    fn bedroc_top_ranked_pair() {
        // N=10, two actives at ranks 1 and 2, alpha=20, evaluated term by term.
        let s: Vec<f64> = (0..10).map(|i| 1.0 - i as f64 / 10.0).collect();
        let y = [1, 1, 0, 0, 0, 0, 0, 0, 0, 0];
        assert_abs_diff_eq!(auc_bed(&s, &y, 20.0).unwrap(), 1.0, epsilon = 1e-12);
        let mut y = [0u8; 10];
        y[2] = 1;
        y[6] = 1;
        assert_abs_diff_eq!(
            auc_bed(&s, &y, 20.0).unwrap(),
            0.016_137_662_299_662_35,
            epsilon = 1e-12
        );
        let mut y = [0u8; 10];
        y[8] = 1;
        y[9] = 1;
        assert_abs_diff_eq!(auc_bed(&s, &y, 20.0).unwrap(), 0.0, epsilon = 1e-12);
        let s: Vec<f64> = (0..20).map(|i| -(i as f64)).collect();
        let mut y = [0u8; 20];
        for r in [2, 5, 11] {
            y[r - 1] = 1;
        }
        assert_abs_diff_eq!(auc_bed(&s, &y, 5.0).unwrap(), 0.508_117_630_989_605_5, epsilon = 1e-12);
    }

    #[test]
    fn bedroc_rejects_bad_alpha() {
        assert!(auc_bed(&[0.1, 0.2], &[0, 1], 0.0).is_err());
    }

    #[test]
    fn ef_examples() {
        let mut s: Vec<f64> = (0..100).map(|i| 1.0 - i as f64 / 100.0).collect();
        let mut y = vec![0u8; 100];
        for i in (0..100).step_by(10) {
            y[i] = 1;
        }
        assert_eq!(enrichment_factor(&s, &y, 0.01).unwrap(), 10.0);
        s[0] = -1.0;
        assert_eq!(enrichment_factor(&s, &y, 0.01).unwrap(), 0.0);
        assert_eq!(enrichment_factor(&s, &[0u8; 100], 0.01), Err(MetricError::NoPositives));
        assert!(enrichment_factor(&s, &y, 1.0).is_err());
    }

    #[test]
    fn ef_with_scores_equal_to_labels_is_capped() {
        let y: Vec<u8> = (0..50).map(|i| (i % 10 == 0) as u8).collect();
        let s: Vec<f64> = y.iter().map(|&v| v as f64).collect();
        for t in [0.01, 0.05, 0.1, 0.2, 0.5] {
            let top = top_count(t, 50) as f64;
            let expected = (5.0f64.min(top) / top) / (5.0 / 50.0);
            assert_abs_diff_eq!(enrichment_factor(&s, &y, t).unwrap(), expected, epsilon = 1e-12);
        }
    }

    #[test]
    fn top_count_rounding() {
        assert_eq!(top_count(0.01, 100), 1);
        assert_eq!(top_count(0.07, 100), 7);
        assert_eq!(top_count(0.015, 100), 2);
        assert_eq!(top_count(0.001, 100), 1);
    }

    #[test]
    fn tie_outcomes_are_deterministic() {
        let s = [0.5; 20];
        let y: Vec<u8> = (0..20).map(|i| (i < 4) as u8).collect();
        assert_eq!(
            enrichment_factor(&s, &y, 0.1).unwrap(),
            enrichment_factor(&s, &y, 0.1).unwrap()
        );
        assert_eq!(auc_bed(&s, &y, 20.0).unwrap(), auc_bed(&s, &y, 20.0).unwrap());
    }
}
