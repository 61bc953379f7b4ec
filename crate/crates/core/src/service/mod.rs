//! Run configuration, model archives, reports and synthetic data, plus the
//! train / predict / evaluate workflows built on them.

pub mod archive;
pub mod config;
pub mod report;
pub mod synth;

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use crate::data::{load_csv, load_svmlight, stratified_holdout, CsvOptions, LabelKind, SparseDataset, SvmLightOptions};
use crate::ensemble::{binary_view, fit_cbf, CbfFit};
use crate::error::{DataError, Error, Result};
use crate::metrics::{fixed_width_bins, logloss_mean, reliability_bins, MetricSpec, LOGLOSS_EPS};
use crate::seed::derive_seed;

use self::archive::ArchivePayload;
use self::config::{InputFormat, RunConfig};

/// `# key: value` lines at the top of an SVMLight file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FileMeta {
    pub threshold: Option<f64>,
    pub n_cols: Option<usize>,
}

fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn read_meta(path: &Path) -> Result<FileMeta> {
    let file = File::open(path).map_err(|e| io_error(path, e))?;
    let mut meta = FileMeta::default();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| io_error(path, e))?;
        let Some(rest) = line.trim().strip_prefix('#') else {
            break;
        };
        let Some((key, value)) = rest.split_once(':') else {
            continue;
        };
        let value = value.trim();
        let parsed = |what: &str| DataError::Invalid(format!("{}: bad {what} header `{value}`", path.display()));
        match key.trim() {
            "threshold" => meta.threshold = Some(value.parse().map_err(|_| parsed("threshold"))?),
            "n_cols" => meta.n_cols = Some(value.parse().map_err(|_| parsed("n_cols"))?),
            _ => {}
        }
    }
    Ok(meta)
}

/// Loads a dataset whose label column holds `source` labels.
pub fn load_dataset(path: &Path, format: &InputFormat, source: LabelKind) -> Result<(SparseDataset<f64>, FileMeta)> {
    match format {
        InputFormat::Svmlight { one_based } => {
            let meta = read_meta(path)?;
            let ds = load_svmlight(
                path,
                source,
                SvmLightOptions {
                    one_based: *one_based,
                    n_cols: meta.n_cols,
                },
            )?;
            Ok((ds, meta))
        }
        InputFormat::Csv {
            label_column,
            feature_columns,
            id_column,
        } => {
            let opts = CsvOptions {
                label_column: Some(label_column.clone()),
                label_kind: source,
                feature_columns: feature_columns.clone(),
                id_column: id_column.clone(),
            };
            Ok((load_csv(path, &opts)?, FileMeta::default()))
        }
    }
}

/// Loads rows for prediction; labels, if present, are ignored.
pub fn load_unlabelled(path: &Path, format: &InputFormat) -> Result<SparseDataset<f64>> {
    match format {
        InputFormat::Svmlight { .. } => Ok(load_dataset(path, format, LabelKind::Continuous)?.0),
        InputFormat::Csv {
            label_column,
            feature_columns,
            id_column,
        } => {
            let mut opts = CsvOptions {
                label_column: Some(label_column.clone()),
                label_kind: LabelKind::Continuous,
                feature_columns: feature_columns.clone(),
                id_column: id_column.clone(),
            };
            match load_csv(path, &opts) {
                Err(DataError::MissingColumn(c)) if &c == label_column => {
                    opts.label_column = None;
                    Ok(load_csv(path, &opts)?)
                }
                other => Ok(other?),
            }
        }
    }
}

fn align_width(a: &mut SparseDataset<f64>, b: &mut SparseDataset<f64>) -> Result<()> {
    let n = a.n_cols().max(b.n_cols());
    a.set_n_cols(n)?;
    b.set_n_cols(n)?;
    Ok(())
}

/// Everything a training run produced.
#[derive(Debug)]
pub struct TrainOutcome {
    pub config: RunConfig,
    pub fit: CbfFit<f64>,
    pub train_scores: Vec<f64>,
    pub valid_scores: Vec<f64>,
    pub test: Option<(Vec<f64>, Vec<u8>)>,
    pub cv_scores: String,
    pub metrics: String,
    pub reliability: String,
}

impl TrainOutcome {
    pub fn model_path(&self) -> PathBuf {
        self.config.output_dir.join("model.cbf")
    }

    pub fn payload(&self) -> ArchivePayload {
        ArchivePayload {
            config: self.config.clone(),
            model: self.fit.model.clone(),
        }
    }

    /// Writes `model.cbf`, `cv_scores.tsv`, `metrics.tsv` and
    /// `reliability.tsv` into the output directory.
    pub fn write(&self) -> Result<()> {
        let dir = &self.config.output_dir;
        std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
        archive::save(self.model_path(), &self.payload())?;
        for (name, text) in [
            ("cv_scores.tsv", &self.cv_scores),
            ("metrics.tsv", &self.metrics),
            ("reliability.tsv", &self.reliability),
        ] {
            let p = dir.join(name);
            std::fs::write(&p, text).map_err(|e| io_error(&p, e))?;
        }
        Ok(())
    }
}

/// Loads data, fits the ensemble on a pool of `workers` threads (`None` =
/// available parallelism) and builds the reports.
pub fn train(config: &RunConfig, workers: Option<usize>) -> Result<TrainOutcome> {
    let (full, meta) = load_dataset(&config.train_path, &config.format, config.labels.source)?;
    let mapping = config.mapping(meta.threshold)?;
    let (train, test) = match &config.test_path {
        Some(p) => {
            let (mut test, _) = load_dataset(p, &config.format, config.labels.source)?;
            let mut train = full;
            align_width(&mut train, &mut test)?;
            (train, Some(test))
        }
        None if config.test_fraction > 0.0 => {
            let y = binary_view(&full, mapping.as_ref())?;
            let (tr, te) = stratified_holdout(&y, config.test_fraction, derive_seed(config.seed, &[0x7E57]))?;
            (full.subset(&tr), Some(full.subset(&te)))
        }
        None => (full, None),
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("workers: {e}")))?;
    let params = config.cbf_params();
    let fit = pool.install(|| fit_cbf(&train, mapping, &params))?;

    let train_scores = pool.install(|| fit.model.predict(&train))?;
    let valid_scores = fit.out_of_fold_predictions()?;
    let test = match &test {
        Some(t) => Some((
            pool.install(|| fit.model.predict(t))?,
            binary_view(t, mapping.as_ref())?,
        )),
        None => None,
    };

    let mut splits: Vec<(&str, &[f64], &[u8])> = vec![
        ("train", &train_scores, &fit.labels),
        ("valid", &valid_scores, &fit.labels),
    ];
    if let Some((s, y)) = &test {
        splits.push(("test", s, y));
    }
    let metrics = report::metrics_tsv(&splits);
    let (rel_scores, rel_labels) = match &test {
        Some((s, y)) => (s.as_slice(), y.as_slice()),
        None => (valid_scores.as_slice(), fit.labels.as_slice()),
    };
    let reliability = report::reliability_tsv(rel_scores, rel_labels, 10);
    let cv_scores = report::cv_scores_tsv(&fit);
    Ok(TrainOutcome {
        config: config.clone(),
        fit,
        train_scores,
        valid_scores,
        test,
        cv_scores,
        metrics,
        reliability,
    })
}

/// Scores `input` with an archived model; returns `row_id<TAB>probability`.
pub fn predict(model_path: &Path, input: &Path) -> Result<String> {
    let payload = archive::load(model_path)?;
    let mut data = load_unlabelled(input, &payload.config.format)?;
    if data.n_cols() < payload.model.n_cols {
        data.set_n_cols(payload.model.n_cols)?;
    }
    let scores = payload.model.predict(&data)?;
    let mut out = String::from("row_id\tprobability\n");
    for (i, s) in scores.iter().enumerate() {
        out.push_str(&format!("{}\t{s}\n", data.row_id(i)));
    }
    Ok(out)
}

/// Reads one number per line, taking the last tab- or space-separated field.
/// A first line whose last field is not numeric is a header.
pub fn read_column(path: &Path) -> Result<Vec<f64>> {
    let file = File::open(path).map_err(|e| io_error(path, e))?;
    let mut out = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| io_error(path, e))?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let field = t.split_whitespace().last().unwrap_or("");
        match field.parse::<f64>() {
            Ok(v) => out.push(v),
            Err(_) if out.is_empty() && n == 0 => continue,
            Err(_) => {
                return Err(DataError::Parse {
                    line: n + 1,
                    msg: format!("`{field}` is not a number"),
                }
                .into())
            }
        }
    }
    Ok(out)
}

/// Requested evaluation output.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EvaluateRequest {
    pub metrics: Vec<MetricSpec>,
    /// Report logloss as a per-record mean instead of a sum.
    pub mean_logloss: bool,
    /// Append the quantile reliability table with this many bins.
    pub reliability_bins: Option<usize>,
    /// Use equal-width bins over `[0, 1]` for the table instead of quantiles.
    pub fixed_width: bool,
}

/// Computes the requested metrics as `metric<TAB>value` lines.
pub fn evaluate(scores: &[f64], labels: &[f64], req: &EvaluateRequest) -> Result<String> {
    if scores.len() != labels.len() {
        return Err(DataError::LengthMismatch {
            what: "scores",
            expected: labels.len(),
            found: scores.len(),
        }
        .into());
    }
    let y: Vec<u8> = labels
        .iter()
        .enumerate()
        .map(|(i, &v)| match v {
            0.0 => Ok(0),
            1.0 => Ok(1),
            _ => Err(DataError::NonBinaryLabel { value: v, line: i + 1 }),
        })
        .collect::<std::result::Result<_, _>>()?;
    let mut out = String::from("metric\tvalue\n");
    for m in &req.metrics {
        let v = match m {
            MetricSpec::Logloss if req.mean_logloss => logloss_mean(scores, &y, LOGLOSS_EPS)?,
            _ => m.evaluate(scores, &y)?,
        };
        out.push_str(&format!("{m}\t{v}\n"));
    }
    if let Some(n) = req.reliability_bins {
        let bins = if req.fixed_width {
            fixed_width_bins(scores, &y, n)?
        } else {
            reliability_bins(scores, &y, n)?
        };
        out.push('\n');
        out.push_str("bin\tcount\tmean_predicted\tpositive_rate\n");
        for (i, b) in bins.bins.iter().enumerate() {
            out.push_str(&format!(
                "{i}\t{}\t{}\t{}\n",
                b.count, b.mean_predicted, b.positive_rate
            ));
        }
    }
    Ok(out)
}
