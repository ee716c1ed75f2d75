//! Experimental protocol: negative sampling, stratified folds, training with
//! early stopping, metrics and result records.

mod config;
mod cv;
mod dataset;
mod folds;
mod metrics;
mod sampling;
mod train;

use thiserror::Error;

pub use config::{derive_seed, TrainConfig};
pub use cv::{
    ablate, config_hash, run_cv, AblationAxis, AblationRow, CheckpointMeta, CvOptions, CvReport, FoldRecord,
    ResultsSink,
};
pub use dataset::{prepare_inputs, sample_environment, Experiment, Sample};
pub use folds::{kfold_split, split_validation};
pub use metrics::{auc_score, f1_score, mean_std, MetricError};
pub use sampling::sample_negatives;
pub use train::{evaluate, predict_all, train_model, EpochRecord, Metrics, TrainOutcome};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PipelineError {
    #[error("cannot draw a distinct negative of size {size} from {num_nodes} nodes")]
    UniverseTooSmall { size: usize, num_nodes: usize },
    #[error("need at least {folds} samples for {folds} folds, got {samples}")]
    TooFewSamples { samples: usize, folds: usize },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("non-finite loss at epoch {epoch}, sample {sample}: {value}")]
    NonFiniteLoss { epoch: usize, sample: usize, value: f64 },
}
