use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::MetricError;
use crate::scalar::Scalar;

use super::{
    auc_bed, auc_prc, auc_roc, enrichment_factor, logloss, reliability_score, DEFAULT_BEDROC_ALPHA, LOGLOSS_EPS,
};

/// A metric together with its parameter.
///
/// Textual form: `auc_roc`, `auc_prc`, `auc_bed@<alpha>`, `ef@<t>`, `logloss`,
/// `reliability_score@<n_bins>`; the parameter suffix is optional where a
/// default exists (`auc_bed` = alpha 20, `reliability_score` = 10 bins).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum MetricSpec {
    AucRoc,
    AucPrc,
    AucBed { alpha: f64 },
    Ef { t: f64 },
    Logloss,
    ReliabilityScore { n_bins: usize },
}

impl MetricSpec {
    pub fn larger_is_better(&self) -> bool {
        !matches!(self, MetricSpec::Logloss | MetricSpec::ReliabilityScore { .. })
    }

    /// Whether the metric depends on the scores only through their order.
    pub fn is_ranking(&self) -> bool {
        matches!(
            self,
            MetricSpec::AucRoc | MetricSpec::AucPrc | MetricSpec::AucBed { .. } | MetricSpec::Ef { .. }
        )
    }

    pub fn evaluate<F: Scalar>(&self, scores: &[F], labels: &[u8]) -> Result<F, MetricError> {
        match *self {
            MetricSpec::AucRoc => auc_roc(scores, labels),
            MetricSpec::AucPrc => auc_prc(scores, labels),
            MetricSpec::AucBed { alpha } => auc_bed(scores, labels, alpha),
            MetricSpec::Ef { t } => enrichment_factor(scores, labels, t),
            MetricSpec::Logloss => logloss(scores, labels, LOGLOSS_EPS),
            MetricSpec::ReliabilityScore { n_bins } => reliability_score(scores, labels, n_bins),
        }
    }

    /// Metric value oriented so that larger is better.
    pub fn oriented<F: Scalar>(&self, scores: &[F], labels: &[u8]) -> Result<F, MetricError> {
        let v = self.evaluate(scores, labels)?;
        Ok(if self.larger_is_better() { v } else { -v })
    }
}

impl fmt::Display for MetricSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricSpec::AucRoc => write!(f, "auc_roc"),
            MetricSpec::AucPrc => write!(f, "auc_prc"),
            MetricSpec::AucBed { alpha } => write!(f, "auc_bed@{alpha}"),
            MetricSpec::Ef { t } => write!(f, "ef@{t}"),
            MetricSpec::Logloss => write!(f, "logloss"),
            MetricSpec::ReliabilityScore { n_bins } => write!(f, "reliability_score@{n_bins}"),
        }
    }
}

impl FromStr for MetricSpec {
    type Err = MetricError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (name, param) = match s.split_once('@') {
            Some((n, p)) => (n.trim(), Some(p.trim())),
            None => (s.trim(), None),
        };
        let real = |p: &str| -> Result<f64, MetricError> {
            p.parse::<f64>()
                .map_err(|_| MetricError::InvalidParameter(format!("bad parameter `{p}` in metric `{s}`")))
        };
        let spec = match (name, param) {
            ("auc_roc", None) => MetricSpec::AucRoc,
            ("auc_prc", None) => MetricSpec::AucPrc,
            ("logloss", None) => MetricSpec::Logloss,
            ("auc_bed", None) => MetricSpec::AucBed {
                alpha: DEFAULT_BEDROC_ALPHA,
            },
            ("auc_bed", Some(p)) => MetricSpec::AucBed { alpha: real(p)? },
            ("ef", Some(p)) => MetricSpec::Ef { t: real(p)? },
            ("reliability_score", None) => MetricSpec::ReliabilityScore { n_bins: 10 },
            ("reliability_score", Some(p)) => MetricSpec::ReliabilityScore {
                n_bins: p
                    .parse()
                    .map_err(|_| MetricError::InvalidParameter(format!("bad bin count `{p}`")))?,
            },
            ("ef", None) => {
                return Err(MetricError::InvalidParameter(
                    "ef needs a fraction, e.g. ef@0.01".into(),
                ))
            }
            _ => return Err(MetricError::InvalidParameter(format!("unknown metric `{s}`"))),
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl MetricSpec {
    pub fn validate(&self) -> Result<(), MetricError> {
        match *self {
            MetricSpec::Ef { t } if !(t > 0.0 && t < 1.0) => Err(MetricError::InvalidParameter(format!(
                "EF fraction must be in (0, 1), got {t}"
            ))),
            MetricSpec::AucBed { alpha } if !(alpha > 0.0 && alpha.is_finite()) => Err(MetricError::InvalidParameter(
                format!("BEDROC alpha must be > 0, got {alpha}"),
            )),
            MetricSpec::ReliabilityScore { n_bins: 0 } => Err(MetricError::InvalidParameter(
                "reliability bins must be positive".into(),
            )),
            _ => Ok(()),
        }
    }
}

impl TryFrom<String> for MetricSpec {
    type Error = MetricError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<MetricSpec> for String {
    fn from(m: MetricSpec) -> String {
        m.to_string()
    }
}
