//! Flat cuts of a merge tree, the labelled taxonomy with its override ledger,
//! the NL2 indicator and the partition report.

mod cut;
mod indicator;
mod partition;
mod state;

use thiserror::Error;

pub use cut::{cut_tree, Cut, CutRequest};
pub use indicator::{nl2, nl2_values, IndicatorConfig, IndicatorResult, LabelSummary, EMPHASIZED};
pub use partition::{category_of, partition_report, PartitionReport, PartitionRow};
pub use state::{
    assign_taxonomy, identity_mapping, OverrideEntry, Target, TaxonomyState, DEFAULT_LABELS,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TaxonomyError {
    #[error("k = {k} is outside 1..={n}")]
    InvalidK { k: usize, n: usize },
    #[error("cut threshold {0} must be a non-negative number")]
    NegativeThreshold(f64),
    #[error("group {0} has no label in the mapping")]
    UnmappedGroup(u32),
    #[error("unknown group {0}")]
    UnknownGroup(u32),
    #[error("unknown entity {0}")]
    UnknownEntity(u64),
    #[error("unknown label {0:?}")]
    UnknownLabel(String),
    #[error("weights not normalized: {0}")]
    WeightsNotNormalized(String),
    #[error("indicator input must be direction-complemented")]
    NotComplemented,
    #[error("{entities} entities but the cut covers {cut}")]
    SizeMismatch { entities: usize, cut: usize },
    #[error("replaying the override ledger does not reproduce the stored assignment")]
    ReplayMismatch,
    #[error("malformed taxonomy state: {0}")]
    Malformed(String),
}
