//! Nearest-neighbour chain agglomeration, O(n²) time for reducible linkages.

use super::distance::DistanceMatrix;
use super::linkage::LinkageKind;
use super::tree::{Merge, MergeTree};

/// Follows chains of nearest neighbours until two clusters are each other's
/// nearest neighbour, merges them and continues from the remaining chain.
///
/// Merges come out of order; they are stably sorted by height and then
/// relabelled to node ids with a union-find. Only exact for reducible
/// linkages.
pub fn nnchain(dm: &DistanceMatrix, linkage: LinkageKind) -> MergeTree {
    debug_assert!(linkage.is_reducible());
    let n = dm.n();
    let mut d: Vec<f64> = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            d.push(dm.get(i, j));
        }
    }
    let mut active = vec![true; n];
    let mut size = vec![1usize; n];
    let mut chain: Vec<usize> = Vec::with_capacity(n);
    let mut raw: Vec<(usize, usize, f64)> = Vec::with_capacity(n.saturating_sub(1));

    while raw.len() + 1 < n {
        if chain.is_empty() {
            let first = active.iter().position(|&a| a).expect("active slot");
            chain.push(first);
        }
        let (a, b, height) = loop {
            let a = chain[chain.len() - 1];
            let prev = (chain.len() >= 2).then(|| chain[chain.len() - 2]);
            // Ties keep the previous chain element, which guarantees progress.
            let (mut b, mut min) = match prev {
                Some(p) => (p, d[a * n + p]),
                None => (usize::MAX, f64::INFINITY),
            };
            for x in 0..n {
                if x != a && active[x] && d[a * n + x] < min {
                    min = d[a * n + x];
                    b = x;
                }
            }
            if Some(b) == prev {
                break (a, b, min);
            }
            chain.push(b);
        };
        chain.truncate(chain.len() - 2);

        let (i, j) = if a < b { (a, b) } else { (b, a) };
        for k in 0..n {
            if !active[k] || k == i || k == j {
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
        active[j] = false;
        raw.push((i, j, height));
    }

    relabel(n, linkage, raw)
}

fn relabel(n: usize, linkage: LinkageKind, mut raw: Vec<(usize, usize, f64)>) -> MergeTree {
    raw.sort_by(|x, y| x.2.total_cmp(&y.2));
    let mut parent: Vec<usize> = (0..n).collect();
    let mut node: Vec<usize> = (0..n).collect();
    let mut size = vec![1usize; n];

    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }

    let merges = raw
        .into_iter()
        .enumerate()
        .map(|(k, (i, j, height))| {
            let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
            let (li, lj) = (node[ri], node[rj]);
            let (root, child) = if size[ri] >= size[rj] {
                (ri, rj)
            } else {
                (rj, ri)
            };
            parent[child] = root;
            size[root] += size[child];
            node[root] = n + k;
            Merge {
                left: li.min(lj),
                right: li.max(lj),
                height,
                size: size[root],
            }
        })
        .collect();
    MergeTree { n, linkage, merges }
}
