use serde::{Deserialize, Serialize};

use crate::data::{stratified_kfold, FoldAssignment, LabelKind, LabelMapping, SparseDataset};
use crate::elastic_net::ElasticNetParams;
use crate::error::TrainError;
use crate::gbm::{DEFAULT_MAX_ROUNDS, DEFAULT_PATIENCE};
use crate::metrics::MetricSpec;
use crate::scalar::Scalar;
use crate::seed::derive_seed;

use super::layer1::{binary_view, train_layer1, CvScore, Layer1Bundle, Layer1Options};
use super::layer2::{assemble_md, train_layer2, Layer2Data};
use super::model::{CbfModel, Layer2Mode};
use super::sampling::{sample_hyperparams, sample_layer2, BoosterMix, SamplingRanges};

/// Settings of one ensemble fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CbfParams {
    /// Models per label kind in layer 1, and layer-2 candidates.
    pub h: usize,
    pub k: usize,
    pub seed: u64,
    /// Label kinds to build bundles for.
    pub bundles: Vec<LabelKind>,
    pub booster_mix: BoosterMix,
    pub ranges: SamplingRanges,
    pub stop_metric: MetricSpec,
    pub selection_metric: MetricSpec,
    pub patience: usize,
    pub max_rounds: usize,
    pub layer2_mode: Layer2Mode,
    pub penalize_intercept: bool,
}

impl Default for CbfParams {
    fn default() -> Self {
        CbfParams {
            h: 5,
            k: 5,
            seed: 0,
            bundles: vec![LabelKind::Binary, LabelKind::Continuous],
            booster_mix: BoosterMix::Alternate,
            ranges: SamplingRanges::default(),
            stop_metric: MetricSpec::Ef { t: 0.01 },
            selection_metric: MetricSpec::AucPrc,
            patience: DEFAULT_PATIENCE,
            max_rounds: DEFAULT_MAX_ROUNDS,
            layer2_mode: Layer2Mode::FoldMean,
            penalize_intercept: false,
        }
    }
}

impl CbfParams {
    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |m: String| Err(TrainError::InvalidParameter(m));
        if self.h == 0 {
            return bad("H must be at least 1".into());
        }
        if self.k < 2 {
            return bad(format!("K must be at least 2, got {}", self.k));
        }
        if self.bundles.is_empty() {
            return bad("at least one label kind is required".into());
        }
        for (i, b) in self.bundles.iter().enumerate() {
            if self.bundles[..i].contains(b) {
                return bad(format!("label kind {} listed twice", b.as_str()));
            }
        }
        if !self.stop_metric.is_ranking() {
            return bad(format!("stop metric {} must be a ranking metric", self.stop_metric));
        }
        if self.patience == 0 || self.max_rounds == 0 {
            return bad("patience and max_rounds must be at least 1".into());
        }
        self.stop_metric.validate()?;
        self.selection_metric.validate()?;
        self.ranges.validate()
    }
}

/// A fitted ensemble with its training diagnostics.
#[derive(Debug, Clone)]
pub struct CbfFit<F: Scalar> {
    pub model: CbfModel<F>,
    pub md: Layer2Data<F>,
    pub labels: Vec<u8>,
}

impl<F: Scalar> CbfFit<F> {
    pub fn layer1_cv(&self) -> impl Iterator<Item = (LabelKind, &CvScore)> {
        self.model
            .bundles
            .iter()
            .filter_map(|b| b.cv.as_ref().map(|cv| (b.label_kind, cv)))
    }

    pub fn layer2_cv(&self) -> Option<&CvScore> {
        self.model.layer2.cv.as_ref()
    }

    /// Best single layer-1 model by cross-validated mean score, searched over
    /// the bundles of the given kinds (all bundles when `kinds` is empty).
    pub fn best_layer1(&self, kinds: &[LabelKind]) -> Option<(LabelKind, usize, f64)> {
        let mut best: Option<(LabelKind, usize, f64)> = None;
        for (kind, cv) in self.layer1_cv() {
            if !kinds.is_empty() && !kinds.contains(&kind) {
                continue;
            }
            let orient = |v: f64| if cv.metric.larger_is_better() { v } else { -v };
            for (h, m) in cv.means().into_iter().enumerate() {
                if !m.is_nan() && best.is_none_or(|(_, _, b)| orient(m) > orient(b)) {
                    best = Some((kind, h, m));
                }
            }
        }
        best
    }

    /// Fold-averaged predictions of one layer-1 model.
    pub fn predict_single(&self, kind: LabelKind, h: usize, data: &SparseDataset<F>) -> Result<Vec<F>, TrainError> {
        let bundle: &Layer1Bundle<F> = self
            .model
            .bundles
            .iter()
            .find(|b| b.label_kind == kind)
            .ok_or_else(|| TrainError::InvalidParameter(format!("no {} bundle", kind.as_str())))?;
        Ok(bundle.predict_model(h, data)?)
    }
}

/// Fits the full ensemble on `data`.
///
/// Rows are split into `k` folds stratified on the binary label. For each
/// requested label kind, `h` sampled boosters are trained per fold and their
/// out-of-fold predictions become layer-2 columns; `h` elastic-net
/// candidates are cross-validated on those columns over the same folds and
/// the best one is kept.
pub fn fit_cbf<F: Scalar>(
    data: &SparseDataset<F>,
    mapping: Option<LabelMapping>,
    params: &CbfParams,
) -> Result<CbfFit<F>, TrainError> {
    params.validate()?;
    if data.n_rows() == 0 {
        return Err(TrainError::EmptyTrain);
    }
    let labels = binary_view(data, mapping.as_ref())?;
    let with_binary;
    let data = if data.binary_labels().is_none() && params.bundles.contains(&LabelKind::Binary) {
        with_binary = data.clone().with_binary_labels(labels.clone())?;
        &with_binary
    } else {
        data
    };
    let folds: FoldAssignment = stratified_kfold(&labels, params.k, derive_seed(params.seed, &[0xF01D]))?;
    let opts = Layer1Options {
        stop_metric: params.stop_metric,
        cv_metric: params.selection_metric,
        patience: params.patience,
        max_rounds: params.max_rounds,
        seed: params.seed,
        label_mapping: mapping,
    };

    let mut bundles = Vec::with_capacity(params.bundles.len());
    for &kind in &params.bundles {
        let tag = match kind {
            LabelKind::Binary => 1,
            LabelKind::Continuous => 2,
        };
        let samples = sample_hyperparams(
            params.h,
            derive_seed(params.seed, &[0x5A4D, tag]),
            params.booster_mix,
            &params.ranges,
        )?;
        bundles.push(train_layer1(data, kind, &folds, &samples, &opts)?);
    }
    let md = assemble_md(&bundles, &labels)?;

    let base = ElasticNetParams {
        penalize_intercept: params.penalize_intercept,
        ..ElasticNetParams::default()
    };
    let candidates = sample_layer2(params.h, derive_seed(params.seed, &[0x4C32]), &params.ranges, &base)?;
    let layer2 = train_layer2(&md, &folds, &candidates, params.selection_metric)?;

    let manifest = md.manifest.clone();
    let mut ordered = bundles;
    ordered.sort_by_key(|b| b.label_kind != LabelKind::Binary);
    let model = CbfModel {
        n_cols: data.n_cols(),
        h: params.h,
        seed: params.seed,
        label_mapping: mapping,
        fold_assignment: folds,
        bundles: ordered,
        manifest,
        layer2,
        layer2_mode: params.layer2_mode,
    };
    model.validate()?;
    Ok(CbfFit { model, md, labels })
}

impl<F: Scalar> CbfFit<F> {
    /// Layer-2 predictions for the training rows, each made by the fold
    /// model that did not see the row's fold.
    pub fn out_of_fold_predictions(&self) -> Result<Vec<F>, TrainError> {
        let folds = &self.model.fold_assignment;
        let mut out = vec![F::zero(); self.md.n_rows()];
        for (k, m) in self.model.layer2.fold_models.iter().enumerate() {
            let idx = folds.valid_indices(k);
            let cols: Vec<Vec<F>> = self
                .md
                .columns
                .iter()
                .map(|c| idx.iter().map(|&i| c[i]).collect())
                .collect();
            for (&i, p) in idx.iter().zip(m.predict_proba(&cols)?) {
                out[i] = p;
            }
        }
        Ok(out)
    }
}
