use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::TaxonomyError;
use crate::cluster::MergeTree;

/// How to turn a dendrogram into a flat partition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", content = "value", rename_all = "kebab-case")]
pub enum CutRequest {
    /// Keep merges at or below the threshold whose subtrees are kept whole.
    ByHeight(f64),
    /// Keep exactly `k` groups.
    ByCount(usize),
}

/// A flat partition of the leaves. Group ids are `1..=k`, numbered in order of
/// each group's smallest member index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cut {
    pub request: CutRequest,
    /// Group id per entity position.
    pub assignment: Vec<u32>,
}

impl Cut {
    pub fn n(&self) -> usize {
        self.assignment.len()
    }

    pub fn group_count(&self) -> usize {
        self.assignment.iter().copied().max().unwrap_or(0) as usize
    }

    pub fn group_ids(&self) -> impl Iterator<Item = u32> {
        1..=self.group_count() as u32
    }

    /// Members (entity positions, ascending) of every group.
    pub fn groups(&self) -> BTreeMap<u32, Vec<usize>> {
        let mut out: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        for (i, &g) in self.assignment.iter().enumerate() {
            out.entry(g).or_default().push(i);
        }
        out
    }

    pub fn members(&self, group: u32) -> Vec<usize> {
        self.assignment
            .iter()
            .enumerate()
            .filter(|(_, &g)| g == group)
            .map(|(i, _)| i)
            .collect()
    }
}

pub fn cut_tree(t: &MergeTree, request: CutRequest) -> Result<Cut, TaxonomyError> {
    let n = t.n;
    let keep = match request {
        CutRequest::ByCount(k) => {
            if k == 0 || k > n {
                return Err(TaxonomyError::InvalidK { k, n });
            }
            n - k
        }
        CutRequest::ByHeight(h) => {
            if h.is_nan() || h < 0.0 {
                return Err(TaxonomyError::NegativeThreshold(h));
            }
            t.merges.len()
        }
    };

    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    // A merge is kept only when both children are whole subtrees, so height
    // inversions cannot join partially severed branches.
    let mut leaf_of: Vec<usize> = (0..n).collect();
    let mut whole = vec![true; n];
    for m in &t.merges[..keep] {
        leaf_of.push(leaf_of[m.left]);
        let joined = whole[m.left]
            && whole[m.right]
            && match request {
                CutRequest::ByHeight(h) => m.height <= h,
                CutRequest::ByCount(_) => true,
            };
        whole.push(joined);
        if joined {
            let a = find(&mut parent, leaf_of[m.left]);
            let b = find(&mut parent, leaf_of[m.right]);
            parent[a.max(b)] = a.min(b);
        }
    }

    let mut group_of_root: BTreeMap<usize, u32> = BTreeMap::new();
    let mut assignment = Vec::with_capacity(n);
    for i in 0..n {
        let root = find(&mut parent, i);
        let next = group_of_root.len() as u32 + 1;
        assignment.push(*group_of_root.entry(root).or_insert(next));
    }
    Ok(Cut {
        request,
        assignment,
    })
}
