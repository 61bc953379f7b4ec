//! Tab-separated reports.

use std::fmt::Write as _;

use crate::data::LabelKind;
use crate::ensemble::{CbfFit, CvScore};
use crate::gbm::BoosterKind;
use crate::metrics::{reliability_bins, MetricSpec, DEFAULT_BEDROC_ALPHA};

/// Metrics written for every split.
pub fn report_metrics() -> Vec<MetricSpec> {
    vec![
        MetricSpec::AucRoc,
        MetricSpec::AucPrc,
        MetricSpec::AucBed {
            alpha: DEFAULT_BEDROC_ALPHA,
        },
        MetricSpec::Ef { t: 0.01 },
        MetricSpec::Logloss,
        MetricSpec::ReliabilityScore { n_bins: 10 },
    ]
}

fn fmt_value(v: f64) -> String {
    if v.is_nan() {
        "NA".into()
    } else {
        format!("{v}")
    }
}

fn cv_rows(out: &mut String, layer: &str, label: &str, boosters: &[String], cv: &CvScore, selected: Option<usize>) {
    let means = cv.means();
    for (h, folds) in cv.folds.iter().enumerate() {
        let _ = write!(out, "{layer}\t{label}\t{h}\t{}\t{}", boosters[h], cv.metric);
        for &s in folds {
            let _ = write!(out, "\t{}", fmt_value(s));
        }
        let _ = writeln!(out, "\t{}\t{}", fmt_value(means[h]), (selected == Some(h)) as u8);
    }
}

/// Per-fold and mean cross-validation scores of every layer-1 model and
/// layer-2 candidate. `selected` marks the best model of each layer-1 bundle
/// and the chosen layer-2 candidate.
pub fn cv_scores_tsv(fit: &CbfFit<f64>) -> String {
    let k = fit.model.fold_assignment.k();
    let mut out = String::from("layer\tlabel\tmodel\tbooster\tmetric");
    for f in 0..k {
        let _ = write!(out, "\tfold_{f}");
    }
    out.push_str("\tcv_mean\tselected\n");
    for b in &fit.model.bundles {
        if let Some(cv) = &b.cv {
            let boosters: Vec<String> = b
                .samples
                .iter()
                .map(|s| match s.booster() {
                    BoosterKind::Tree => "gbtree".to_string(),
                    BoosterKind::Linear => "gblinear".to_string(),
                })
                .collect();
            cv_rows(&mut out, "layer1", b.label_kind.as_str(), &boosters, cv, cv.best());
        }
    }
    if let Some(cv) = fit.layer2_cv() {
        let names = vec!["elastic_net".to_string(); cv.folds.len()];
        cv_rows(
            &mut out,
            "layer2",
            LabelKind::Binary.as_str(),
            &names,
            cv,
            Some(fit.model.layer2.selected),
        );
    }
    out
}

/// `split, metric, value` rows; a metric that cannot be computed on a split
/// (e.g. no positives) is written as `NA`.
pub fn metrics_tsv(splits: &[(&str, &[f64], &[u8])]) -> String {
    let mut out = String::from("split\tmetric\tvalue\n");
    for &(name, scores, labels) in splits {
        for m in report_metrics() {
            let v = m.evaluate(scores, labels).unwrap_or(f64::NAN);
            let _ = writeln!(out, "{name}\t{m}\t{}", fmt_value(v));
        }
    }
    out
}

/// Quantile reliability table.
pub fn reliability_tsv(scores: &[f64], labels: &[u8], n_bins: usize) -> String {
    let mut out = String::from("bin\tcount\tmean_predicted\tpositive_rate\n");
    if let Ok(bins) = reliability_bins(scores, labels, n_bins) {
        for (i, b) in bins.bins.iter().enumerate() {
            let _ = writeln!(
                out,
                "{i}\t{}\t{}\t{}",
                b.count,
                fmt_value(b.mean_predicted),
                fmt_value(b.positive_rate)
            );
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metrics_table_has_six_rows_per_split() {
        let s = [0.9, 0.1, 0.8, 0.3, 0.2, 0.7, 0.4, 0.6, 0.5, 0.05];
        let y = [1, 0, 1, 0, 0, 1, 0, 0, 0, 0];
        let t = metrics_tsv(&[("train", &s, &y), ("test", &s[..2], &[0, 0])]);
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines.len(), 1 + 12);
        assert_eq!(lines[1], "train\tauc_roc\t1");
        assert!(lines[7].starts_with("test\tauc_roc\tNA"));
    }

    #[test]
    fn reliability_table() {
        let s: Vec<f64> = (1..=20).map(|i| i as f64 * 0.05).collect();
        let mut y = vec![0u8; 20];
        y[17] = 1;
        y[19] = 1;
        let t = reliability_tsv(&s, &y, 10);
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines.len(), 11);
        assert_eq!(lines[0], "bin\tcount\tmean_predicted\tpositive_rate");
        assert!(lines[10].starts_with("9\t2\t"));
    }
}
