use serde::{Deserialize, Serialize};

use super::ClusterError;
use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    SquaredEuclidean,
    /// Merge heights of a dendrogram.
    Cophenetic,
}

/// Symmetric dissimilarities stored as the condensed upper triangle.
///
/// The pair `(i, j)` with `i < j` lives at `n*i - i*(i+1)/2 + (j - i - 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceMatrix {
    n: usize,
    condensed: Vec<f64>,
    metric: Metric,
}

#[inline]
pub(crate) fn condensed_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    n * i - i * (i + 1) / 2 + (j - i - 1)
}

impl DistanceMatrix {
    /// Validates length, finiteness and non-negativity.
    pub fn from_condensed(
        n: usize,
        condensed: Vec<f64>,
        metric: Metric,
    ) -> Result<Self, ClusterError> {
        let expected = n * n.saturating_sub(1) / 2;
        if condensed.len() != expected {
            return Err(ClusterError::InvalidDistances(format!(
                "condensed length {} for n = {n}, expected {expected}",
                condensed.len()
            )));
        }
        if let Some(bad) = condensed.iter().find(|d| !d.is_finite() || **d < 0.0) {
            return Err(ClusterError::InvalidDistances(format!(
                "entry {bad} is negative or non-finite"
            )));
        }
        Ok(DistanceMatrix {
            n,
            condensed,
            metric,
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        match i.cmp(&j) {
            std::cmp::Ordering::Equal => 0.0,
            std::cmp::Ordering::Less => self.condensed[condensed_index(self.n, i, j)],
            std::cmp::Ordering::Greater => self.condensed[condensed_index(self.n, j, i)],
        }
    }

    pub fn condensed(&self) -> &[f64] {
        &self.condensed
    }

    /// Full square form, mostly for inspection and tests.
    pub fn to_square(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j)).collect())
            .collect()
    }

    /// Relabels rows: entry `(i, j)` of the result is entry `(perm[i], perm[j])` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> DistanceMatrix {
        let n = self.n;
        let mut condensed = Vec::with_capacity(self.condensed.len());
        for i in 0..n {
            for j in i + 1..n {
                condensed.push(self.get(perm[i], perm[j]));
            }
        }
        DistanceMatrix {
            n,
            condensed,
            metric: self.metric,
        }
    }
}

/// Squared Euclidean distance between every pair of rows.
pub fn pairwise_distances(z: &Matrix) -> Result<DistanceMatrix, ClusterError> {
    let n = z.rows();
    if n < 2 {
        return Err(ClusterError::TooFewEntities(n));
    }
    let mut condensed = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        let ri = z.row(i);
        for j in i + 1..n {
            let d: f64 = ri
                .iter()
                .zip(z.row(j))
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            condensed.push(d);
        }
    }
    DistanceMatrix::from_condensed(n, condensed, Metric::SquaredEuclidean)
}
