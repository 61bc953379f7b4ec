use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::data::{Direction, LabelKind, LabelMapping};
use crate::ensemble::{BoosterMix, CbfParams, Layer2Mode, SamplingRanges};
use crate::error::{Error, Result};
use crate::gbm::{DEFAULT_MAX_ROUNDS, DEFAULT_PATIENCE};
use crate::metrics::MetricSpec;

/// Environment variable that replaces the configured seed.
pub const SEED_ENV: &str = "CBF_SEED";

/// Input file layout.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InputFormat {
    Svmlight {
        #[serde(default)]
        one_based: bool,
    },
    Csv {
        label_column: String,
        #[serde(default)]
        feature_columns: Option<Vec<String>>,
        #[serde(default)]
        id_column: Option<String>,
    },
}

impl Default for InputFormat {
    fn default() -> Self {
        InputFormat::Svmlight { one_based: false }
    }
}

/// What the label in the input files is and how it maps to binary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabelConfig {
    /// Kind of the label stored in the files.
    pub source: LabelKind,
    /// Binarization threshold for continuous labels. When absent, a
    /// `# threshold: <value>` header line in the training file is used.
    #[serde(default)]
    pub threshold: Option<f64>,
    #[serde(default)]
    pub direction: Direction,
    /// Label kinds to train layer-1 bundles on. Defaults to both for a
    /// continuous source and binary otherwise.
    #[serde(default)]
    pub bundles: Option<Vec<LabelKind>>,
}

impl Default for LabelConfig {
    fn default() -> Self {
        LabelConfig {
            source: LabelKind::Binary,
            threshold: None,
            direction: Direction::GreaterIsPositive,
            bundles: None,
        }
    }
}

impl LabelConfig {
    pub fn bundles(&self) -> Vec<LabelKind> {
        self.bundles.clone().unwrap_or_else(|| match self.source {
            LabelKind::Binary => vec![LabelKind::Binary],
            LabelKind::Continuous => vec![LabelKind::Binary, LabelKind::Continuous],
        })
    }
}

fn default_h() -> usize {
    5
}
fn default_k() -> usize {
    5
}
fn default_test_fraction() -> f64 {
    0.1
}
fn default_stop() -> MetricSpec {
    MetricSpec::Ef { t: 0.01 }
}
fn default_selection() -> MetricSpec {
    MetricSpec::AucPrc
}
fn default_patience() -> usize {
    DEFAULT_PATIENCE
}
fn default_max_rounds() -> usize {
    DEFAULT_MAX_ROUNDS
}
fn default_output() -> PathBuf {
    PathBuf::from("cbf_output")
}

/// A training run as read from a JSON file. Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub train_path: PathBuf,
    #[serde(default)]
    pub test_path: Option<PathBuf>,
    /// Stratified held-out share of the training file when `test_path` is
    /// absent; 0 disables the split.
    #[serde(default = "default_test_fraction")]
    pub test_fraction: f64,
    #[serde(default)]
    pub format: InputFormat,
    #[serde(default)]
    pub labels: LabelConfig,
    #[serde(default = "default_h")]
    pub h: usize,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_stop")]
    pub stop_metric: MetricSpec,
    #[serde(default = "default_selection")]
    pub selection_metric: MetricSpec,
    #[serde(default)]
    pub booster_mix: BoosterMix,
    #[serde(default)]
    pub ranges: SamplingRanges,
    #[serde(default = "default_patience")]
    pub patience: usize,
    #[serde(default = "default_max_rounds")]
    pub max_rounds: usize,
    #[serde(default)]
    pub layer2_mode: Layer2Mode,
    #[serde(default)]
    pub penalize_intercept: bool,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
}

impl RunConfig {
    /// A configuration with defaults for everything but the training file.
    pub fn new(train_path: impl Into<PathBuf>) -> Self {
        RunConfig {
            train_path: train_path.into(),
            test_path: None,
            test_fraction: default_test_fraction(),
            format: InputFormat::default(),
            labels: LabelConfig::default(),
            h: default_h(),
            k: default_k(),
            seed: 0,
            stop_metric: default_stop(),
            selection_metric: default_selection(),
            booster_mix: BoosterMix::default(),
            ranges: SamplingRanges::default(),
            patience: default_patience(),
            max_rounds: default_max_rounds(),
            layer2_mode: Layer2Mode::default(),
            penalize_intercept: false,
            output_dir: default_output(),
        }
    }

    /// Reads, resolves and validates a config file. Relative paths are taken
    /// relative to the file's directory; `CBF_SEED` overrides the seed.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut cfg: RunConfig =
            serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        cfg.apply_seed_override(std::env::var(SEED_ENV).ok().as_deref())?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.train_path);
        if let Some(t) = self.test_path.as_mut() {
            fix(t);
        }
        fix(&mut self.output_dir);
    }

    pub fn apply_seed_override(&mut self, value: Option<&str>) -> Result<()> {
        if let Some(v) = value {
            self.seed = v
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("{SEED_ENV}: `{v}` is not an unsigned integer")))?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.h == 0 {
            return bad("h: must be at least 1".into());
        }
        if self.k < 2 {
            return bad(format!("k: must be at least 2, got {}", self.k));
        }
        if !self.train_path.is_file() {
            return bad(format!("train_path: {} does not exist", self.train_path.display()));
        }
        if let Some(t) = &self.test_path {
            if !t.is_file() {
                return bad(format!("test_path: {} does not exist", t.display()));
            }
        }
        if !(0.0..1.0).contains(&self.test_fraction) {
            return bad(format!("test_fraction: must lie in [0, 1), got {}", self.test_fraction));
        }
        if let Some(t) = self.labels.threshold {
            if !t.is_finite() {
                return bad("labels.threshold: must be finite".into());
            }
        }
        let bundles = self.labels.bundles();
        if bundles.is_empty() {
            return bad("labels.bundles: at least one label kind is required".into());
        }
        if self.labels.source == LabelKind::Binary && bundles.contains(&LabelKind::Continuous) {
            return bad("labels.bundles: a continuous bundle needs continuous source labels".into());
        }
        if !self.stop_metric.is_ranking() {
            return bad(format!("stop_metric: {} is not a ranking metric", self.stop_metric));
        }
        if self.patience == 0 {
            return bad("patience: must be at least 1".into());
        }
        if self.max_rounds == 0 {
            return bad("max_rounds: must be at least 1".into());
        }
        self.stop_metric
            .validate()
            .map_err(|e| Error::Config(format!("stop_metric: {e}")))?;
        self.selection_metric
            .validate()
            .map_err(|e| Error::Config(format!("selection_metric: {e}")))?;
        self.ranges
            .validate()
            .map_err(|e| Error::Config(format!("ranges: {e}")))?;
        Ok(())
    }

    pub fn mapping(&self, threshold: Option<f64>) -> Result<Option<LabelMapping>> {
        match (self.labels.source, threshold.or(self.labels.threshold)) {
            (LabelKind::Binary, _) => Ok(None),
            (LabelKind::Continuous, Some(t)) => Ok(Some(LabelMapping::new(t, self.labels.direction)?)),
            (LabelKind::Continuous, None) => Err(Error::Config(
                "labels.threshold: required for continuous labels (or a `# threshold:` header)".into(),
            )),
        }
    }

    pub fn cbf_params(&self) -> CbfParams {
        CbfParams {
            h: self.h,
            k: self.k,
            seed: self.seed,
            bundles: self.labels.bundles(),
            booster_mix: self.booster_mix,
            ranges: self.ranges,
            stop_metric: self.stop_metric,
            selection_metric: self.selection_metric,
            patience: self.patience,
            max_rounds: self.max_rounds,
            layer2_mode: self.layer2_mode,
            penalize_intercept: self.penalize_intercept,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
        let p = dir.join(name);
        std::fs::File::create(&p).unwrap().write_all(text.as_bytes()).unwrap();
        p
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "train.svm", "1 0:1\n0 1:1\n");
        let cfg_path = write(dir.path(), "run.json", r#"{"train_path": "train.svm"}"#);
        let cfg = RunConfig::load(&cfg_path).unwrap();
        assert_eq!(cfg.h, 5);
        assert_eq!(cfg.k, 5);
        assert_eq!(cfg.stop_metric, MetricSpec::Ef { t: 0.01 });
        assert_eq!(cfg.selection_metric, MetricSpec::AucPrc);
        assert_eq!(cfg.train_path, dir.path().join("train.svm"));
        assert_eq!(cfg.labels.bundles(), vec![LabelKind::Binary]);
    }

    #[test]
    fn unknown_keys_and_bad_values_are_config_errors() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "train.svm", "1 0:1\n");
        for (text, needle) in [
            (r#"{"train_path": "train.svm", "H": 3}"#, "unknown field"),
            (r#"{"train_path": "train.svm", "h": 0}"#, "h:"),
            (r#"{"train_path": "train.svm", "k": 1}"#, "k:"),
            (r#"{"train_path": "missing.svm"}"#, "train_path"),
            (
                r#"{"train_path": "train.svm", "stop_metric": "logloss"}"#,
                "stop_metric",
            ),
            (
                r#"{"train_path": "train.svm", "selection_metric": "auc_xyz"}"#,
                "auc_xyz",
            ),
        ] {
            let p = write(dir.path(), "run.json", text);
            let err = RunConfig::load(&p).unwrap_err();
            assert_eq!(err.exit_code(), 1, "{text}");
            assert!(err.to_string().contains(needle), "{err} lacks {needle}");
        }
    }

    #[test]
    fn seed_override() {
        let mut cfg = RunConfig::new("x");
        cfg.apply_seed_override(Some("42")).unwrap();
        assert_eq!(cfg.seed, 42);
        assert!(cfg.apply_seed_override(Some("-1")).is_err());
        cfg.apply_seed_override(None).unwrap();
        assert_eq!(cfg.seed, 42);
    }

    #[test]
    fn continuous_source_needs_threshold() {
        let mut cfg = RunConfig::new("x");
        cfg.labels.source = LabelKind::Continuous;
        assert!(cfg.mapping(None).is_err());
        assert_eq!(cfg.mapping(Some(2.0)).unwrap(), Some(LabelMapping::greater(2.0)));
        assert_eq!(cfg.labels.bundles(), vec![LabelKind::Binary, LabelKind::Continuous]);
    }
}
