//! Synthetic rare-event data: sparse binary fingerprints with a latent
//! continuous activity.

use std::io::Write;

use rand::seq::index::sample;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::data::{write_svmlight, LabelKind, LabelMapping, SparseDataset};
use crate::error::DataError;
use crate::seed::rng_for;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthParams {
    pub n: usize,
    pub n_features: usize,
    /// Fraction of rows above the activity threshold.
    pub pos_rate: f64,
    /// Number of features that shift the activity.
    pub signal: usize,
    /// Probability that a feature bit is set.
    pub density: f64,
    /// Standard deviation of the Gaussian activity noise.
    pub noise: f64,
    pub seed: u64,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            n: 2000,
            n_features: 128,
            pos_rate: 0.05,
            signal: 16,
            density: 0.1,
            noise: 1.0,
            seed: 0,
        }
    }
}

/// A generated dataset carrying both label kinds, and the threshold linking them.
#[derive(Debug, Clone)]
pub struct SynthData {
    pub dataset: SparseDataset<f64>,
    pub mapping: LabelMapping,
}

impl SynthParams {
    fn validate(&self) -> Result<(), DataError> {
        let bad = |m: String| Err(DataError::Invalid(m));
        if self.n < 2 {
            return bad(format!("n must be at least 2, got {}", self.n));
        }
        if self.n_features == 0 {
            return bad("n_features must be at least 1".into());
        }
        if !(self.pos_rate > 0.0 && self.pos_rate < 1.0) {
            return bad(format!("pos_rate must lie in (0, 1), got {}", self.pos_rate));
        }
        if self.signal > self.n_features {
            return bad(format!("signal {} exceeds n_features {}", self.signal, self.n_features));
        }
        if !(self.density > 0.0 && self.density <= 1.0) {
            return bad(format!("density must lie in (0, 1], got {}", self.density));
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return bad(format!("noise must be >= 0, got {}", self.noise));
        }
        let n_pos = (self.n as f64 * self.pos_rate).round() as usize;
        if n_pos == 0 || n_pos == self.n {
            return bad(format!(
                "pos_rate {} leaves one class empty at n = {}",
                self.pos_rate, self.n
            ));
        }
        Ok(())
    }
}

/// Generates rows of independent Bernoulli(`density`) bits. The activity is
/// a signed weighted sum over `signal` random features, plus pairwise
/// interactions between consecutive informative features, plus noise. Rows
/// whose activity exceeds the `1 − pos_rate` quantile are positive.
pub fn synthesize(p: &SynthParams) -> Result<SynthData, DataError> {
    p.validate()?;
    let mut rng = rng_for(p.seed, &[0x5157]);
    let informative: Vec<u32> = sample(&mut rng, p.n_features, p.signal)
        .into_iter()
        .map(|i| i as u32)
        .collect();
    let weights: Vec<f64> = (0..p.signal)
        .map(|_| {
            let w = 0.5 + rng.random::<f64>();
            if rng.random_bool(0.3) {
                -w
            } else {
                w
            }
        })
        .collect();

    let mut rows = Vec::with_capacity(p.n);
    let mut activity = Vec::with_capacity(p.n);
    let mut bits = vec![false; p.n_features];
    for _ in 0..p.n {
        let mut row = Vec::new();
        for (j, b) in bits.iter_mut().enumerate() {
            *b = rng.random::<f64>() < p.density;
            if *b {
                row.push((j as u32, 1.0));
            }
        }
        let mut a = 0.0;
        for (s, &j) in informative.iter().enumerate() {
            if bits[j as usize] {
                a += weights[s];
            }
        }
        for pair in informative.chunks_exact(2) {
            if bits[pair[0] as usize] && bits[pair[1] as usize] {
                a += 2.0;
            }
        }
        a += p.noise * rng.sample::<f64, _>(StandardNormal);
        rows.push(row);
        activity.push(a);
    }

    let n_pos = (p.n as f64 * p.pos_rate).round() as usize;
    let mut sorted = activity.clone();
    sorted.sort_by(f64::total_cmp);
    let cut = p.n - n_pos;
    let threshold = 0.5 * (sorted[cut - 1] + sorted[cut]);
    let mapping = LabelMapping::greater(threshold);
    let binary: Vec<u8> = activity.iter().map(|&a| mapping.apply(a)).collect();
    let ids = (0..p.n).map(|i| format!("r{i}")).collect();
    let dataset = SparseDataset::new(p.n_features, rows)?
        .with_continuous_labels(activity)?
        .with_binary_labels(binary)?
        .with_row_ids(ids)?;
    Ok(SynthData { dataset, mapping })
}

/// Writes the data as SVMLight with the activity as label, preceded by
/// comment lines recording the threshold.
pub fn write_synth<W: Write>(data: &SynthData, mut out: W) -> Result<(), DataError> {
    let io_err = |e: std::io::Error| DataError::Invalid(format!("write failed: {e}"));
    writeln!(out, "# threshold: {}", data.mapping.threshold).map_err(io_err)?;
    writeln!(out, "# direction: greater_is_positive").map_err(io_err)?;
    writeln!(out, "# n_cols: {}", data.dataset.n_cols()).map_err(io_err)?;
    write_svmlight(&data.dataset, LabelKind::Continuous, false, &mut out)
}
