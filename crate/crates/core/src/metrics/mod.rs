//! Ranking and probability-quality metrics for rare-event classification.
//!
//! All functions are pure. Ranking metrics ([`auc_roc`], [`auc_prc`],
//! [`auc_bed`], [`enrichment_factor`]) depend only on the score order;
//! [`logloss`] and [`reliability_score`] read the score values as
//! probabilities.

mod probability;
mod ranking;
mod spec;

pub use self::probability::{
    fixed_width_bins, logloss, logloss_mean, reliability_bins, reliability_score, ReliabilityBin, ReliabilityBins,
    LOGLOSS_EPS,
};
pub use self::ranking::{
    auc_bed, auc_bed_with_seed, auc_prc, auc_roc, enrichment_factor, enrichment_factor_with_seed, top_count,
    DEFAULT_BEDROC_ALPHA, TIE_SEED,
};
pub use self::spec::MetricSpec;

use crate::error::MetricError;
use crate::scalar::Scalar;

pub(crate) fn check_inputs<F: Scalar>(scores: &[F], labels: &[u8]) -> Result<usize, MetricError> {
    if scores.len() != labels.len() {
        return Err(MetricError::LengthMismatch {
            scores: scores.len(),
            labels: labels.len(),
        });
    }
    if labels.iter().any(|&y| y > 1) {
        return Err(MetricError::InvalidParameter("labels must be 0 or 1".into()));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(MetricError::InvalidParameter("NaN score".into()));
    }
    Ok(labels.iter().filter(|&&y| y == 1).count())
}
