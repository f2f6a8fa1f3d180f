//! Scoring, cross-validation and the regression used to compare document
//! representations.

mod cv;
mod logistic;
mod metrics;

pub use cv::{cross_validate, CvReport, FoldReport};
pub use logistic::{fit_intercept_only, fit_loglinear_aic, RegressionFit};
pub use metrics::{
    confusion, f1, pairwise_clustering_f1, partition_map, same_cluster_pairs, score, ClassScore, ConfusionMatrix,
    PairScore, PrfReport,
};
