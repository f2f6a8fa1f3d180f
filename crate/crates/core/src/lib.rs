//! Line-level detection of unnatural language in plain text extracted from
//! technical documents.
//!
//! Every line is labeled one of [`Label::Text`], [`Label::Table`],
//! [`Label::Code`], [`Label::Formula`] or [`Label::Misc`]. The crate covers the
//! whole pipeline: corpus I/O and synthetic generation, per-line feature
//! extraction, a two-stage sequential linear classifier with its baselines,
//! scoring, and the downstream similarity/clustering experiments that measure
//! what stripping the unnatural lines buys.
//!
//! Numeric code that does not touch the model file (word vectors, TF-IDF
//! spaces, k-means, logistic fitting) is generic over [`Scalar`]; the aliases
//! below pin those types to [`Real`].

pub mod classifier;
pub mod corpus;
pub mod downstream;
pub mod embedding;
pub mod error;
pub mod evaluation;
pub mod features;
pub mod rng;
pub mod scalar;

pub use corpus::{AnnotatedDocument, Corpus, FoldSplit, Label, LineRecord};
pub use error::{Error, Result};
pub use scalar::Scalar;

/// Scalar used by the model file, feature vectors and the CLI.
pub type Real = f64;

pub type WordVectors = embedding::WordVectors<Real>;
pub type LineVector = embedding::LineVector<Real>;
pub type DocumentVector = downstream::DocumentVector<Real>;
pub type DocumentSpace = downstream::DocumentSpace<Real>;
pub type RegressionFit = evaluation::RegressionFit<Real>;
