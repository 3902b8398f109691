//! Bias-free MLP surrogate for the model-D inverse: signal plus eight
//! scene parameters in, tube temperature out.

mod bench;
mod dataset;
mod io;
mod mlp;
mod train;

pub use bench::{bench, quantile_sorted, Agreement, BenchResult, MIN_BENCH_ROWS};
pub use dataset::{generate_dataset, LabeledDataset, FEATURE_NAMES};
pub use io::{decode_model, encode_model, load_model, save_model};
pub use mlp::{MlpModel, MlpTopology, NormRange, INPUTS, LAYER_SIZES, PARAMETER_COUNT};
pub use train::{fit_normalization, rms_error, train, train_with_validation, TrainConfig, TrainingReport};
