use super::*;
use crate::data::{FoldAssignment, LabelKind};
use crate::elastic_net::{ElasticNetModel, ElasticNetParams};
use crate::metrics::MetricSpec;
use crate::service::synth::{synthesize, SynthParams};

fn small_params(h: usize, bundles: Vec<LabelKind>) -> CbfParams {
    CbfParams {
        h,
        k: 3,
        seed: 7,
        bundles,
        patience: 10,
        max_rounds: 60,
        stop_metric: MetricSpec::AucPrc,
        ranges: SamplingRanges {
            min_child_weight: Range::new(0.1, 2.0),
            ..SamplingRanges::default()
        },
        ..CbfParams::default()
    }
}

fn data(n: usize, seed: u64) -> crate::service::synth::SynthData {
    synthesize(&SynthParams {
        n,
        n_features: 32,
        pos_rate: 0.1,
        signal: 8,
        seed,
        ..SynthParams::default()
    })
    .unwrap()
}

#[test]
fn both_bundles_give_width_2h_and_out_of_fold_cells() {
    let d = data(300, 1);
    let fit = fit_cbf(
        &d.dataset,
        Some(d.mapping),
        &small_params(2, vec![LabelKind::Continuous, LabelKind::Binary]),
    )
    .unwrap();
    assert_eq!(fit.md.width(), 4);
    assert_eq!(fit.md.n_rows(), 300);
    let kinds: Vec<_> = fit.md.manifest.iter().map(|t| t.label_kind).collect();
    assert_eq!(
        kinds,
        [
            LabelKind::Binary,
            LabelKind::Binary,
            LabelKind::Continuous,
            LabelKind::Continuous
        ]
    );
    for b in &fit.model.bundles {
        assert!(b.out_of_fold(&fit.model.fold_assignment));
        assert_eq!(b.models.len(), 2);
        assert!(b.models.iter().all(|row| row.len() == 3));
    }
    // Binary bundle columns are probabilities.
    assert!(fit.md.columns[..2].iter().flatten().all(|&v| v > 0.0 && v < 1.0));
}

#[test]
fn md_cells_come_from_the_held_out_model() {
    let d = data(200, 2);
    let fit = fit_cbf(&d.dataset, Some(d.mapping), &small_params(1, vec![LabelKind::Binary])).unwrap();
    let bundle = &fit.model.bundles[0];
    let folds = &fit.model.fold_assignment;
    for k in 0..folds.k() {
        let idx = folds.valid_indices(k);
        let pred = bundle.models[0][k].predict(&d.dataset.subset(&idx)).unwrap();
        for (&i, &p) in idx.iter().zip(&pred) {
            assert_eq!(fit.md.columns[0][i], p);
        }
    }
}

#[test]
fn predictions_are_probabilities_and_differ_from_md() {
    let d = data(240, 3);
    let fit = fit_cbf(&d.dataset, Some(d.mapping), &small_params(2, vec![LabelKind::Binary])).unwrap();
    let p = fit.model.predict(&d.dataset).unwrap();
    assert_eq!(p.len(), 240);
    assert!(p.iter().all(|&v| v > 0.0 && v < 1.0));
    let md_new = fit.model.predict_layer1(&d.dataset).unwrap();
    assert_ne!(md_new, fit.md.columns);
}

#[test]
fn layer1_prediction_averages_fold_models() {
    let d = data(150, 4);
    let fit = fit_cbf(&d.dataset, Some(d.mapping), &small_params(1, vec![LabelKind::Binary])).unwrap();
    let models = &fit.model.bundles[0].models[0];
    let per_fold: Vec<Vec<f64>> = models.iter().map(|m| m.predict(&d.dataset).unwrap()).collect();
    let md_new = fit.model.predict_layer1(&d.dataset).unwrap();
    for i in 0..d.dataset.n_rows() {
        let mean = per_fold.iter().map(|p| p[i]).sum::<f64>() / per_fold.len() as f64;
        assert_eq!(md_new[0][i], mean);
    }
}

#[test]
fn fixed_seed_is_reproducible() {
    let d = data(200, 5);
    let params = small_params(2, vec![LabelKind::Binary, LabelKind::Continuous]);
    let a = fit_cbf(&d.dataset, Some(d.mapping), &params).unwrap();
    let b = fit_cbf(&d.dataset, Some(d.mapping), &params).unwrap();
    assert_eq!(a.model, b.model);
    assert_eq!(
        a.model.predict(&d.dataset).unwrap(),
        b.model.predict(&d.dataset).unwrap()
    );
}

#[test]
fn layer2_selects_best_mean_and_breaks_ties_low() {
    let d = data(200, 6);
    let fit = fit_cbf(&d.dataset, Some(d.mapping), &small_params(3, vec![LabelKind::Binary])).unwrap();
    let cv = fit.layer2_cv().unwrap();
    let means = cv.means();
    let best = means.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    assert_eq!(
        fit.model.layer2.selected,
        means.iter().position(|&m| m == best).unwrap()
    );

    let tie = CvScore {
        metric: MetricSpec::AucPrc,
        folds: vec![vec![0.5, 0.5], vec![0.5, 0.5]],
    };
    assert_eq!(tie.best(), Some(0));
    let lower = CvScore {
        metric: MetricSpec::Logloss,
        folds: vec![vec![3.0], vec![2.0]],
    };
    assert_eq!(lower.best(), Some(1));
}

#[test]
fn assemble_rejects_misaligned_bundles() {
    let d = data(150, 8);
    let fit = fit_cbf(&d.dataset, Some(d.mapping), &small_params(1, vec![LabelKind::Binary])).unwrap();
    let mut bundle = fit.model.bundles[0].clone();
    assert!(assemble_md(&[bundle.clone()], &fit.labels).is_ok());
    bundle.md_columns[0].pop();
    assert!(assemble_md(&[bundle], &fit.labels).is_err());
}

#[test]
fn single_candidate_is_selected() {
    let md = Layer2Data {
        columns: vec![(0..20).map(|i| i as f64 / 20.0).collect()],
        labels: (0..20).map(|i| (i % 3 == 0) as u8).collect(),
        manifest: vec![ColumnTag {
            label_kind: LabelKind::Binary,
            h: 0,
        }],
    };
    let folds = FoldAssignment::from_vec(2, (0..20).map(|i| i % 2).collect()).unwrap();
    let fit = train_layer2(&md, &folds, &[ElasticNetParams::default()], MetricSpec::AucRoc).unwrap();
    assert_eq!(fit.selected, 0);
    assert_eq!(fit.fold_models.len(), 2);
    assert!(train_layer2::<f64>(&md, &folds, &[], MetricSpec::AucRoc).is_err());
}

#[test]
fn fold_mean_and_refit_modes() {
    let d = data(200, 9);
    let mut fit = fit_cbf(&d.dataset, Some(d.mapping), &small_params(1, vec![LabelKind::Binary])).unwrap();
    let cols = fit.model.predict_layer1(&d.dataset).unwrap();
    let mean = fit.model.predict(&d.dataset).unwrap();
    let fold: Vec<Vec<f64>> = fit
        .model
        .layer2
        .fold_models
        .iter()
        .map(|m: &ElasticNetModel<f64>| m.predict_proba(&cols).unwrap())
        .collect();
    for i in 0..mean.len() {
        let m = fold.iter().map(|p| p[i]).sum::<f64>() / fold.len() as f64;
        assert!((m - mean[i]).abs() < 1e-15);
    }
    fit.model.layer2_mode = Layer2Mode::Refit;
    assert_eq!(
        fit.model.predict(&d.dataset).unwrap(),
        fit.model.layer2.refit.predict_proba(&cols).unwrap()
    );
}

#[test]
fn continuous_only_needs_mapping() {
    let d = data(150, 10);
    let mut ds = d.dataset.clone();
    ds = crate::data::SparseDataset::new(ds.n_cols(), ds.rows().to_vec())
        .unwrap()
        .with_continuous_labels(ds.continuous_labels().unwrap().to_vec())
        .unwrap();
    assert!(fit_cbf(&ds, None, &small_params(1, vec![LabelKind::Continuous])).is_err());
    let fit = fit_cbf(&ds, Some(d.mapping), &small_params(1, vec![LabelKind::Continuous])).unwrap();
    assert_eq!(fit.md.width(), 1);
}

#[test]
fn width_mismatch_on_predict() {
    let d = data(150, 11);
    let fit = fit_cbf(&d.dataset, Some(d.mapping), &small_params(1, vec![LabelKind::Binary])).unwrap();
    let other = crate::data::SparseDataset::<f64>::new(5, vec![vec![]]).unwrap();
    assert!(fit.model.predict(&other).is_err());
}

#[test]
fn invalid_params_are_rejected() {
    let d = data(100, 12);
    for p in [
        CbfParams {
            h: 0,
            ..small_params(1, vec![LabelKind::Binary])
        },
        CbfParams {
            k: 1,
            ..small_params(1, vec![LabelKind::Binary])
        },
        small_params(1, vec![]),
        small_params(1, vec![LabelKind::Binary, LabelKind::Binary]),
        CbfParams {
            stop_metric: MetricSpec::Logloss,
            ..small_params(1, vec![LabelKind::Binary])
        },
    ] {
        assert!(fit_cbf(&d.dataset, Some(d.mapping), &p).is_err());
    }
}
