//! Segmenting territorial entities into policy categories.
//!
//! The pipeline: per-attribute min-max normalization ([`normalize`]),
//! agglomerative clustering ([`cluster`]), cutting the dendrogram and
//! labelling groups with an auditable override ledger ([`taxonomy`]), the NL2
//! weighted-norm indicator, and per-label reporting ([`report`], [`svg`]).
//! [`pipeline`] runs everything in batch and [`session`] keeps interactive
//! state for the HTTP service.
//!
//! ```
//! use municlust::prelude::*;
//!
//! let rows = [[0.0, 10.0], [1.0, 11.0], [50.0, 60.0], [52.0, 61.0]];
//! let z = minmax_normalize_matrix(&Matrix::from_rows(&rows).unwrap(), vec!["a".into(), "b".into()]).unwrap();
//! let tree = agglomerate(&pairwise_distances(&z.z).unwrap(), LinkageKind::Ward).unwrap();
//! let cut = cut_tree(&tree, CutRequest::ByCount(2)).unwrap();
//! assert_eq!(cut.assignment, [1, 1, 2, 2]);
//! ```

pub mod analysis;
pub mod cluster;
pub mod diagnostics;
pub mod fixture;
pub mod ingest;
pub mod matrix;
pub mod metrics;
pub mod normalize;
pub mod pipeline;
pub mod report;
pub mod session;
pub mod svg;
pub mod taxonomy;

/// The commonly used types and functions.
pub mod prelude {
    pub use crate::analysis::{Analysis, AnalysisOptions, ClusterInput};
    pub use crate::cluster::{
        agglomerate, agglomerate_with, cophenetic_heights, pairwise_distances, DistanceMatrix,
        LinkageKind, Merge, MergeTree, Strategy,
    };
    pub use crate::diagnostics::{Diagnostic, Rule};
    pub use crate::ingest::{AttributeSchema, Dataset, EntityRecord, Format, ParseOptions};
    pub use crate::matrix::Matrix;
    pub use crate::metrics::adjusted_rand_index;
    pub use crate::normalize::{
        apply_direction_complement, minmax_normalize, minmax_normalize_matrix, NormalizedMatrix,
    };
    pub use crate::report::{
        boxplot_stats, category_means, compare_entities, radial_profile, Scale, SuitabilityMatrix,
    };
    pub use crate::taxonomy::{
        assign_taxonomy, cut_tree, nl2, partition_report, Cut, CutRequest, IndicatorConfig,
        OverrideEntry, Target, TaxonomyState,
    };
}
