//! Downstream use of the classifier: stripping unnatural lines, TF-IDF
//! document vectors, seeded k-means and the before/after comparison.

mod kmeans;
mod report;
mod tfidf;

pub use kmeans::{
    assignment_cost, init_seeds, seeded_kmeans, GoldClustering, KMeansResult, SeedScheme, DEFAULT_MAX_ITERS,
};
pub use report::{
    default_keep, removal_effect_report, removal_effect_with_labels, remove_unnatural, similarity_pairs, AicComparison,
    ClusteringRow, DeltaRow, RemovalConfig, RemovalReport, RemovalSummary, Variant, DEFAULT_K_SWEEP, REMOVED_SUFFIX,
};
pub use tfidf::{
    build_space, build_vectors, cosine, cosine_weights, terms, DocumentSpace, DocumentVector, TermWeights,
};
