//! Exhaustive O(n³) agglomeration, valid for every linkage kind.

use super::distance::DistanceMatrix;
use super::linkage::LinkageKind;
use super::tree::{Merge, MergeTree};

/// At each step, merges the closest pair of active clusters. Ties go to the
/// lexicographically smallest `(smaller node id, larger node id)` pair.
pub fn naive(dm: &DistanceMatrix, linkage: LinkageKind) -> MergeTree {
    let n = dm.n();
    // Square working copy indexed by slot; slot i holds cluster node_of[i].
    let mut d: Vec<f64> = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            d.push(dm.get(i, j));
        }
    }
    let mut node_of: Vec<usize> = (0..n).collect();
    let mut size = vec![1usize; n];
    let mut active: Vec<usize> = (0..n).collect();
    let mut merges = Vec::with_capacity(n.saturating_sub(1));

    for step in 0..n.saturating_sub(1) {
        let mut best: Option<(f64, (usize, usize), usize, usize)> = None;
        for (ai, &i) in active.iter().enumerate() {
            for &j in &active[ai + 1..] {
                let dist = d[i * n + j];
                let key = ordered(node_of[i], node_of[j]);
                let better = match best {
                    None => true,
                    Some((bd, bkey, _, _)) => dist < bd || (dist == bd && key < bkey),
                };
                if better {
                    best = Some((dist, key, i, j));
                }
            }
        }
        let (height, (left, right), i, j) = best.expect("at least two active clusters");
        for &k in &active {
            if k == i || k == j {
                continue;
            }
            let v = linkage.update(
                d[k * n + i],
                d[k * n + j],
                height,
                size[i],
                size[j],
                size[k],
            );
            d[k * n + i] = v;
            d[i * n + k] = v;
        }
        size[i] += size[j];
        node_of[i] = n + step;
        active.retain(|&s| s != j);
        merges.push(Merge {
            left,
            right,
            height,
            size: size[i],
        });
    }
    MergeTree { n, linkage, merges }
}

#[inline]
fn ordered(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}
