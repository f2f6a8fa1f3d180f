//! Line classifiers: the two-stage sequential linear model and its baselines.

pub mod baselines;
pub mod linear;
pub mod sequential;

pub use baselines::{baseline_clm, baseline_weighted_random, ClmModel};
pub use linear::{
    argmax_label, train_linear, LinearModel, ScalingStats, TrainConfig, TrainSummary, DEFAULT_CROSS_FIT_FOLDS,
};
pub use sequential::{
    fit_feature_config, predict_document, train_sequential, train_stage1, SequentialModel, Stage, MODEL_FORMAT_VERSION,
};
