#![allow(dead_code)]

use municlust::cluster::{LinkageKind, Merge, MergeTree};
use municlust::matrix::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Matrix {
    let data = (0..n * d).map(|_| rng.random_range(0.0..100.0)).collect();
    Matrix::from_vec(n, d, data)
}

pub fn sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn centroid(rows: &Matrix, members: &[usize]) -> Vec<f64> {
    let mut c = vec![0.0; rows.cols()];
    for &m in members {
        for (ci, v) in c.iter_mut().zip(rows.row(m)) {
            *ci += v;
        }
    }
    c.iter().map(|v| v / members.len() as f64).collect()
}

/// Agglomeration computed from each linkage's definition over member sets,
/// without any update recurrence. Ties go to the smallest (min id, max id).
pub fn definition_oracle(rows: &Matrix, kind: LinkageKind) -> MergeTree {
    let n = rows.rows();
    // (node id, members, weighted-median centre)
    let mut live: Vec<(usize, Vec<usize>, Vec<f64>)> =
        (0..n).map(|i| (i, vec![i], rows.row(i).to_vec())).collect();
    let mut merges = Vec::new();
    let dist = |a: &(usize, Vec<usize>, Vec<f64>), b: &(usize, Vec<usize>, Vec<f64>)| -> f64 {
        let pairs = || {
            a.1.iter()
                .flat_map(|&i| b.1.iter().map(move |&j| sq(rows.row(i), rows.row(j))))
        };
        match kind {
            LinkageKind::Single => pairs().fold(f64::INFINITY, f64::min),
            LinkageKind::Complete => pairs().fold(f64::NEG_INFINITY, f64::max),
            LinkageKind::Average => pairs().sum::<f64>() / (a.1.len() * b.1.len()) as f64,
            LinkageKind::Ward => {
                let (na, nb) = (a.1.len() as f64, b.1.len() as f64);
                2.0 * na * nb / (na + nb) * sq(&centroid(rows, &a.1), &centroid(rows, &b.1))
            }
            LinkageKind::Centroid => sq(&centroid(rows, &a.1), &centroid(rows, &b.1)),
            LinkageKind::Median => sq(&a.2, &b.2),
        }
    };
    for k in 0..n - 1 {
        let mut best: Option<(f64, usize, usize)> = None;
        for x in 0..live.len() {
            for y in x + 1..live.len() {
                let h = dist(&live[x], &live[y]);
                let key = (live[x].0.min(live[y].0), live[x].0.max(live[y].0));
                let better = match best {
                    None => true,
                    Some((bh, bx, by)) => {
                        let bkey = (live[bx].0.min(live[by].0), live[bx].0.max(live[by].0));
                        h < bh || (h == bh && key < bkey)
                    }
                };
                if better {
                    best = Some((h, x, y));
                }
            }
        }
        let (h, x, y) = best.unwrap();
        let b = live.remove(y);
        let a = live.remove(x);
        let mut members = a.1.clone();
        members.extend(&b.1);
        let centre: Vec<f64> = a.2.iter().zip(&b.2).map(|(p, q)| (p + q) / 2.0).collect();
        merges.push(Merge {
            left: a.0.min(b.0),
            right: a.0.max(b.0),
            height: h,
            size: members.len(),
        });
        live.push((n + k, members, centre));
    }
    MergeTree {
        n,
        linkage: kind,
        merges,
    }
}

/// Sorted minimum-spanning-tree edge weights (Prim, dense).
pub fn mst_weights(rows: &Matrix) -> Vec<f64> {
    let n = rows.rows();
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    best[0] = 0.0;
    let mut out = Vec::with_capacity(n - 1);
    for step in 0..n {
        let u = (0..n)
            .filter(|&v| !in_tree[v])
            .min_by(|&a, &b| best[a].total_cmp(&best[b]))
            .unwrap();
        in_tree[u] = true;
        if step > 0 {
            out.push(best[u]);
        }
        for v in 0..n {
            if !in_tree[v] {
                best[v] = best[v].min(sq(rows.row(u), rows.row(v)));
            }
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

/// Leaf sets created by each merge, as sorted vectors, in merge order.
pub fn merge_sets(t: &MergeTree) -> Vec<Vec<usize>> {
    (0..t.merges.len())
        .map(|k| {
            let mut m = t.members(t.n + k);
            m.sort_unstable();
            m
        })
        .collect()
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}
