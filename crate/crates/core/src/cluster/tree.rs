use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::distance::{condensed_index, DistanceMatrix, Metric};
use super::linkage::LinkageKind;
use super::ClusterError;

/// One agglomeration step. `left < right` as node ids.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
    pub size: usize,
}

/// A stepwise dendrogram over `n` leaves.
///
/// Leaves are nodes `0..n`; the `k`-th merge creates node `n + k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MergeTree {
    pub n: usize,
    pub linkage: LinkageKind,
    pub merges: Vec<Merge>,
}

impl MergeTree {
    /// Checks node numbering, single parenthood and sizes.
    pub fn validate(&self) -> Result<(), ClusterError> {
        let bad = |m: String| Err(ClusterError::InvalidTree(m));
        if self.n == 0 {
            return bad("no leaves".into());
        }
        if self.merges.len() != self.n - 1 {
            return bad(format!(
                "{} merges for {} leaves",
                self.merges.len(),
                self.n
            ));
        }
        let mut used = vec![false; 2 * self.n - 1];
        for (k, m) in self.merges.iter().enumerate() {
            let node = self.n + k;
            for child in [m.left, m.right] {
                if child >= node {
                    return bad(format!(
                        "merge {k} references node {child} before it exists"
                    ));
                }
                if std::mem::replace(&mut used[child], true) {
                    return bad(format!("node {child} merged twice"));
                }
            }
            if m.left == m.right {
                return bad(format!("merge {k} joins node {} with itself", m.left));
            }
            if m.size != self.size_of(m.left) + self.size_of(m.right) {
                return bad(format!(
                    "merge {k} size {} inconsistent with children",
                    m.size
                ));
            }
            if !m.height.is_finite() {
                return bad(format!("merge {k} height is not finite"));
            }
        }
        Ok(())
    }

    pub fn root(&self) -> usize {
        2 * self.n - 2
    }

    pub fn is_leaf(&self, node: usize) -> bool {
        node < self.n
    }

    pub fn size_of(&self, node: usize) -> usize {
        if node < self.n {
            1
        } else {
            self.merges[node - self.n].size
        }
    }

    pub fn height_of(&self, node: usize) -> f64 {
        if node < self.n {
            0.0
        } else {
            self.merges[node - self.n].height
        }
    }

    pub fn children(&self, node: usize) -> Option<(usize, usize)> {
        (node >= self.n).then(|| {
            let m = &self.merges[node - self.n];
            (m.left, m.right)
        })
    }

    pub fn heights(&self) -> Vec<f64> {
        self.merges.iter().map(|m| m.height).collect()
    }

    /// Number of steps where the merge height drops below the previous one.
    pub fn inversions(&self) -> usize {
        self.merges
            .windows(2)
            .filter(|w| w[1].height < w[0].height)
            .count()
    }

    /// Leaves under `node`, in display order.
    pub fn members(&self, node: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.size_of(node));
        let mut stack = vec![node];
        while let Some(v) = stack.pop() {
            match self.children(v) {
                Some((l, r)) => {
                    stack.push(r);
                    stack.push(l);
                }
                None => out.push(v),
            }
        }
        out
    }

    /// Left-before-right traversal from the root, smaller child id first.
    pub fn leaf_order(&self) -> Vec<usize> {
        if self.n == 1 {
            return vec![0];
        }
        self.members(self.root())
    }

    /// Newick text with branch lengths equal to height differences.
    /// Leaves are labelled by `labels[i]` or by their index.
    pub fn to_newick(&self, labels: Option<&[String]>) -> String {
        fn escape(s: &str) -> String {
            if s.chars().any(|c| "()[]':;, \t".contains(c)) {
                format!("'{}'", s.replace('\'', "''"))
            } else {
                s.to_string()
            }
        }
        fn walk(t: &MergeTree, node: usize, labels: Option<&[String]>, out: &mut String) {
            match t.children(node) {
                None => match labels.and_then(|l| l.get(node)) {
                    Some(l) => out.push_str(&escape(l)),
                    None => {
                        let _ = write!(out, "{node}");
                    }
                },
                Some((l, r)) => {
                    out.push('(');
                    for (idx, child) in [l, r].into_iter().enumerate() {
                        if idx > 0 {
                            out.push(',');
                        }
                        walk(t, child, labels, out);
                        let _ = write!(out, ":{}", t.height_of(node) - t.height_of(child));
                    }
                    out.push(')');
                }
            }
        }
        let mut out = String::new();
        walk(self, self.root(), labels, &mut out);
        out.push(';');
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("merge tree serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, ClusterError> {
        let t: MergeTree =
            serde_json::from_str(s).map_err(|e| ClusterError::InvalidTree(e.to_string()))?;
        t.validate()?;
        Ok(t)
    }
}

/// Entry `(i, j)` is the height of the merge that first joins leaves `i` and `j`.
pub fn cophenetic_heights(t: &MergeTree) -> DistanceMatrix {
    let n = t.n;
    let mut condensed = vec![0.0; n * n.saturating_sub(1) / 2];
    let mut members: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    members.reserve(n.saturating_sub(1));
    for m in &t.merges {
        let (l, r) = (&members[m.left], &members[m.right]);
        for &a in l {
            for &b in r {
                let (i, j) = if a < b { (a, b) } else { (b, a) };
                condensed[condensed_index(n, i, j)] = m.height;
            }
        }
        let mut joined = members[m.left].clone();
        joined.extend_from_slice(&members[m.right]);
        members.push(joined);
    }
    DistanceMatrix::from_condensed(n, condensed, Metric::Cophenetic)
        .unwrap_or_else(|_| panic!("negative or non-finite merge height in tree"))
}
