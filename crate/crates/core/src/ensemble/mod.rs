//! Two-layer stacking: cross-validated boosters feeding an elastic net.

mod layer1;
mod layer2;
mod model;
mod pipeline;
mod sampling;

pub use self::layer1::{binary_view, train_layer1, CvScore, Layer1Bundle, Layer1Options};
pub use self::layer2::{assemble_md, train_layer2, ColumnTag, Layer2Data, Layer2Fit};
pub use self::model::{CbfModel, Layer2Mode};
pub use self::pipeline::{fit_cbf, CbfFit, CbfParams};
pub use self::sampling::{
    sample_hyperparams, sample_layer2, BoosterMix, HyperParamSample, Range, SamplingRanges, SpikedRange,
};

#[cfg(test)]
mod tests;
