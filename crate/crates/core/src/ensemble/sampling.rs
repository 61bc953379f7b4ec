use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::elastic_net::ElasticNetParams;
use crate::error::TrainError;
use crate::gbm::{BoosterKind, BoosterParams, LinearParams, TreeParams};
use crate::seed::rng_for;

const MAX_ATTEMPTS: usize = 1000;

/// How boosters are assigned to the `H` layer-1 models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoosterMix {
    /// gbtree for even `h`, gblinear for odd `h`.
    #[default]
    Alternate,
    Gbtree,
    Gblinear,
}

impl BoosterMix {
    pub fn booster_for(self, h: usize) -> BoosterKind {
        match self {
            BoosterMix::Alternate if h.is_multiple_of(2) => BoosterKind::Tree,
            BoosterMix::Alternate => BoosterKind::Linear,
            BoosterMix::Gbtree => BoosterKind::Tree,
            BoosterMix::Gblinear => BoosterKind::Linear,
        }
    }
}

/// Closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
}

impl Range {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Range { lo, hi }
    }

    fn check(&self, name: &str, log: bool) -> Result<(), TrainError> {
        let ok = self.lo.is_finite() && self.hi.is_finite() && self.lo <= self.hi && (!log || self.lo > 0.0);
        if ok {
            Ok(())
        } else {
            Err(TrainError::InvalidParameter(format!(
                "sampling range {name} = [{}, {}]",
                self.lo, self.hi
            )))
        }
    }

    fn uniform<R: Rng>(&self, rng: &mut R) -> f64 {
        self.lo + (self.hi - self.lo) * rng.random::<f64>()
    }

    fn log_uniform<R: Rng>(&self, rng: &mut R) -> f64 {
        let (a, b) = (self.lo.ln(), self.hi.ln());
        (a + (b - a) * rng.random::<f64>()).exp()
    }
}

/// A value that is 0 with probability `zero_prob`, else drawn from `range`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpikedRange {
    pub zero_prob: f64,
    pub range: Range,
}

impl SpikedRange {
    fn draw<R: Rng>(&self, rng: &mut R, log: bool) -> f64 {
        if rng.random::<f64>() < self.zero_prob {
            0.0
        } else if log {
            self.range.log_uniform(rng)
        } else {
            self.range.uniform(rng)
        }
    }
}

/// Ranges the random hyper-parameter search draws from. Scale-type values
/// are log-uniform, fractions uniform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingRanges {
    pub learning_rate: Range,
    pub max_depth: (usize, usize),
    pub min_child_weight: Range,
    pub gamma: SpikedRange,
    pub subsample: Range,
    pub colsample: Range,
    pub lambda: Range,
    pub alpha: SpikedRange,
    /// Drawn uniformly when not zero.
    pub max_delta_step: SpikedRange,
    pub linear_lambda: Range,
    pub linear_alpha: Range,
    pub linear_lambda_bias: Range,
    pub layer2_lambda1: Range,
    pub layer2_lambda2: Range,
}

impl Default for SamplingRanges {
    fn default() -> Self {
        SamplingRanges {
            learning_rate: Range::new(0.01, 0.3),
            max_depth: (3, 10),
            min_child_weight: Range::new(1.0, 64.0),
            gamma: SpikedRange {
                zero_prob: 0.5,
                range: Range::new(1e-3, 10.0),
            },
            subsample: Range::new(0.5, 1.0),
            colsample: Range::new(0.5, 1.0),
            lambda: Range::new(0.1, 100.0),
            alpha: SpikedRange {
                zero_prob: 0.5,
                range: Range::new(1e-3, 10.0),
            },
            max_delta_step: SpikedRange {
                zero_prob: 0.75,
                range: Range::new(1.0, 10.0),
            },
            linear_lambda: Range::new(1e-3, 100.0),
            linear_alpha: Range::new(1e-3, 100.0),
            linear_lambda_bias: Range::new(1e-3, 100.0),
            layer2_lambda1: Range::new(1e-6, 1.0),
            layer2_lambda2: Range::new(1e-6, 1.0),
        }
    }
}

impl SamplingRanges {
    pub fn validate(&self) -> Result<(), TrainError> {
        self.learning_rate.check("learning_rate", true)?;
        if self.learning_rate.hi > 1.0 {
            return Err(TrainError::InvalidParameter("learning_rate range exceeds 1".into()));
        }
        if self.max_depth.0 < 1 || self.max_depth.0 > self.max_depth.1 {
            return Err(TrainError::InvalidParameter(format!(
                "max_depth range {:?}",
                self.max_depth
            )));
        }
        self.min_child_weight.check("min_child_weight", true)?;
        self.gamma.range.check("gamma", true)?;
        self.alpha.range.check("alpha", true)?;
        self.max_delta_step.range.check("max_delta_step", false)?;
        for (name, r) in [("subsample", self.subsample), ("colsample", self.colsample)] {
            r.check(name, true)?;
            if r.hi > 1.0 {
                return Err(TrainError::InvalidParameter(format!("{name} range exceeds 1")));
            }
        }
        for (name, r) in [
            ("lambda", self.lambda),
            ("linear_lambda", self.linear_lambda),
            ("linear_alpha", self.linear_alpha),
            ("linear_lambda_bias", self.linear_lambda_bias),
            ("layer2_lambda1", self.layer2_lambda1),
            ("layer2_lambda2", self.layer2_lambda2),
        ] {
            r.check(name, true)?;
        }
        for (name, s) in [
            ("gamma", self.gamma),
            ("alpha", self.alpha),
            ("max_delta_step", self.max_delta_step),
        ] {
            if !(0.0..=1.0).contains(&s.zero_prob) {
                return Err(TrainError::InvalidParameter(format!(
                    "{name} zero_prob = {}",
                    s.zero_prob
                )));
            }
        }
        Ok(())
    }

    fn draw<R: Rng>(&self, kind: BoosterKind, rng: &mut R) -> BoosterParams {
        match kind {
            BoosterKind::Tree => BoosterParams::Tree(TreeParams {
                learning_rate: self.learning_rate.log_uniform(rng),
                max_depth: rng.random_range(self.max_depth.0..=self.max_depth.1),
                min_child_weight: self.min_child_weight.log_uniform(rng),
                gamma: self.gamma.draw(rng, true),
                subsample: self.subsample.uniform(rng),
                colsample_bytree: self.colsample.uniform(rng),
                colsample_bylevel: self.colsample.uniform(rng),
                lambda: self.lambda.log_uniform(rng),
                alpha: self.alpha.draw(rng, true),
                max_delta_step: self.max_delta_step.draw(rng, false),
            }),
            BoosterKind::Linear => BoosterParams::Linear(LinearParams {
                learning_rate: self.learning_rate.log_uniform(rng),
                lambda: self.linear_lambda.log_uniform(rng),
                alpha: self.linear_alpha.log_uniform(rng),
                lambda_bias: self.linear_lambda_bias.log_uniform(rng),
            }),
        }
    }
}

/// One sampled layer-1 configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperParamSample {
    pub h: usize,
    pub params: BoosterParams,
}

impl HyperParamSample {
    pub fn booster(&self) -> BoosterKind {
        match self.params {
            BoosterParams::Tree(_) => BoosterKind::Tree,
            BoosterParams::Linear(_) => BoosterKind::Linear,
        }
    }
}

fn unique<T: PartialEq, R: Rng>(
    n: usize,
    rng: &mut R,
    mut draw: impl FnMut(usize, &mut R) -> T,
) -> Result<Vec<T>, TrainError> {
    if n == 0 {
        return Err(TrainError::InvalidParameter("H must be at least 1".into()));
    }
    let mut out: Vec<T> = Vec::with_capacity(n);
    for h in 0..n {
        let mut attempts = 0;
        loop {
            let cand = draw(h, rng);
            if !out.contains(&cand) {
                out.push(cand);
                break;
            }
            attempts += 1;
            if attempts >= MAX_ATTEMPTS {
                return Err(TrainError::InvalidParameter(format!(
                    "could not draw a unique configuration for model {h} in {MAX_ATTEMPTS} attempts"
                )));
            }
        }
    }
    Ok(out)
}

/// Draws `h` pairwise distinct booster configurations.
pub fn sample_hyperparams(
    h: usize,
    seed: u64,
    mix: BoosterMix,
    ranges: &SamplingRanges,
) -> Result<Vec<HyperParamSample>, TrainError> {
    ranges.validate()?;
    let mut rng = rng_for(seed, &[0x4859_5045]);
    unique(h, &mut rng, |i, rng| ranges.draw(mix.booster_for(i), rng)).map(|params| {
        params
            .into_iter()
            .enumerate()
            .map(|(h, params)| HyperParamSample { h, params })
            .collect()
    })
}

/// Draws `h` pairwise distinct layer-2 elastic-net penalties.
pub fn sample_layer2(
    h: usize,
    seed: u64,
    ranges: &SamplingRanges,
    base: &ElasticNetParams,
) -> Result<Vec<ElasticNetParams>, TrainError> {
    ranges.validate()?;
    let mut rng = rng_for(seed, &[0x4c32]);
    unique(h, &mut rng, |_, rng| ElasticNetParams {
        lambda1: ranges.layer2_lambda1.log_uniform(rng),
        lambda2: ranges.layer2_lambda2.log_uniform(rng),
        ..*base
    })
}
