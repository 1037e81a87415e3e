//! Experiment harness for diazo IR prediction: CSV ingestion, seeded splits,
//! metrics, model bundles, and the similarity, noise and learning-curve
//! experiments. A synthetic generator provides labelled data for desk-scale runs.

pub mod config;
pub mod dataset;
pub mod error;
pub mod experiments;
pub mod export;
pub mod features;
pub mod metrics;
pub mod pipeline;
pub mod report;
pub mod split;
pub mod synthetic;

pub use config::{Config, NoiseTarget};
pub use dataset::{ingest_csv, ingest_reader, Dataset, IssueKind, Record, RowIssue, Severity};
pub use error::{HarnessError, Result};
pub use experiments::{
    cross_validate, curve_subsets, learning_curve, noise_experiment, similarity_experiment, CvReport, CurveReport,
    NoiseReport, SimilarityReport,
};
pub use export::{features_csv, LayoutSidecar};
pub use features::FeatureSet;
pub use metrics::{carbonyl_count, metrics, pearson, EvalReport};
pub use pipeline::{evaluate, explain, importance, train, ExplainReport, ModelBundle, Subset, Trained};
pub use split::{split, Split};
pub use synthetic::{generate, SyntheticParams};
