//! Pairwise distances and agglomerative merge trees.
//!
//! [`agglomerate`] picks the nearest-neighbour chain for reducible linkages
//! (single, complete, average, Ward) and the exhaustive scan for centroid
//! and median. Both share the Lance–Williams update in [`LinkageKind::update`]
//! and the tie rule: the lexicographically smallest pair of node ids wins.
//! Heights stay in squared-distance units.

mod distance;
mod linkage;
mod naive;
mod nnchain;
mod tree;

use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use distance::{pairwise_distances, DistanceMatrix, Metric};
pub use linkage::{Coefficients, LinkageKind};
pub use naive::naive;
pub use nnchain::nnchain;
pub use tree::{cophenetic_heights, Merge, MergeTree};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClusterError {
    #[error("need at least 2 entities, found {0}")]
    TooFewEntities(usize),
    #[error("invalid linkage: {0}")]
    InvalidLinkage(String),
    #[error("invalid distance matrix: {0}")]
    InvalidDistances(String),
    #[error("invalid merge tree: {0}")]
    InvalidTree(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// Nearest-neighbour chain when the linkage is reducible, otherwise naive.
    #[default]
    Auto,
    NnChain,
    Naive,
}

impl FromStr for Strategy {
    type Err = ClusterError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "auto" => Ok(Strategy::Auto),
            "nn-chain" | "nnchain" => Ok(Strategy::NnChain),
            "naive" => Ok(Strategy::Naive),
            other => Err(ClusterError::InvalidLinkage(format!(
                "unknown strategy {other}"
            ))),
        }
    }
}

pub fn agglomerate(dm: &DistanceMatrix, linkage: LinkageKind) -> Result<MergeTree, ClusterError> {
    agglomerate_with(dm, linkage, Strategy::Auto)
}

pub fn agglomerate_with(
    dm: &DistanceMatrix,
    linkage: LinkageKind,
    strategy: Strategy,
) -> Result<MergeTree, ClusterError> {
    if dm.n() < 2 {
        return Err(ClusterError::TooFewEntities(dm.n()));
    }
    let tree = match (strategy, linkage.is_reducible()) {
        (Strategy::NnChain, false) => {
            return Err(ClusterError::InvalidLinkage(format!(
                "{linkage} is not reducible; nearest-neighbour chains do not apply"
            )))
        }
        (Strategy::Auto | Strategy::NnChain, true) => nnchain(dm, linkage),
        _ => naive(dm, linkage),
    };
    let inversions = tree.inversions();
    if inversions > 0 {
        log::warn!("{linkage} linkage produced {inversions} height inversion(s)");
    }
    Ok(tree)
}
