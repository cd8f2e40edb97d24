//! Per-label statistics, the policy suitability matrix and entity comparisons.

mod boxplot;
mod compare;
mod means;
mod radial;
mod suitability;

use thiserror::Error;

pub use boxplot::{
    boxplot_stats, boxplot_stats_with_ids, category_boxplots, BoxplotSummary, LabelBoxplots,
    Outlier,
};
pub use compare::{compare_entities, Comparison, DEFAULT_CLOSENESS};
pub use means::{category_means, CategoryMeans, Scale};
pub use radial::{radial_profile, RadialProfile};
pub use suitability::SuitabilityMatrix;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReportError {
    #[error("no values to summarize")]
    EmptyInput,
    #[error("unknown label {0:?}")]
    UnknownLabel(String),
    #[error("unknown policy {0:?}")]
    UnknownPolicy(String),
    #[error("unknown entity {0}")]
    UnknownEntity(u64),
    #[error("inconsistent input: {0}")]
    InconsistentInput(String),
    #[error("invalid suitability matrix: {0}")]
    InvalidMatrix(String),
}
