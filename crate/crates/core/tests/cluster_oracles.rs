mod common;

use common::*;
use municlust::cluster::{
    agglomerate, agglomerate_with, cophenetic_heights, pairwise_distances, LinkageKind, Strategy,
};
use municlust::matrix::Matrix;
use rand::seq::SliceRandom;
use rand::Rng;

#[test]
fn every_linkage_matches_its_definition() {
    let mut r = rng(11);
    for case in 0..30 {
        let n = r.random_range(2..=12);
        let rows = random_matrix(&mut r, n, 4);
        let dm = pairwise_distances(&rows).unwrap();
        for kind in LinkageKind::ALL {
            let got = agglomerate(&dm, kind).unwrap();
            let want = definition_oracle(&rows, kind);
            assert_eq!(merge_sets(&got), merge_sets(&want), "case {case} {kind}");
            for (g, w) in got.merges.iter().zip(&want.merges) {
                assert!(
                    close(g.height, w.height, 1e-9),
                    "case {case} {kind}: {} vs {}",
                    g.height,
                    w.height
                );
            }
        }
    }
}

#[test]
fn both_strategies_agree_with_definition_for_reducible_kinds() {
    let mut r = rng(12);
    for _ in 0..10 {
        let rows = random_matrix(&mut r, 15, 3);
        let dm = pairwise_distances(&rows).unwrap();
        for kind in LinkageKind::REDUCIBLE {
            let a = agglomerate_with(&dm, kind, Strategy::NnChain).unwrap();
            let b = agglomerate_with(&dm, kind, Strategy::Naive).unwrap();
            assert_eq!(merge_sets(&a), merge_sets(&b));
            assert_eq!(merge_sets(&a), merge_sets(&definition_oracle(&rows, kind)));
        }
    }
}

#[test]
fn single_linkage_heights_are_mst_edges() {
    let mut r = rng(13);
    for _ in 0..20 {
        let n = r.random_range(2..=25);
        let rows = random_matrix(&mut r, n, 5);
        let t = agglomerate(&pairwise_distances(&rows).unwrap(), LinkageKind::Single).unwrap();
        let h = t.heights();
        let w = mst_weights(&rows);
        assert_eq!(h.len(), w.len());
        for (a, b) in h.iter().zip(&w) {
            assert!((a - b).abs() <= 1e-9, "{a} vs {b}");
        }
    }
}

#[test]
fn relabelling_inputs_permutes_cophenetic_matrix() {
    let mut r = rng(14);
    for kind in LinkageKind::ALL {
        let n = 14;
        let rows = random_matrix(&mut r, n, 3);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut r);
        let permuted: Vec<Vec<f64>> = perm.iter().map(|&p| rows.row(p).to_vec()).collect();
        let c1 =
            cophenetic_heights(&agglomerate(&pairwise_distances(&rows).unwrap(), kind).unwrap());
        let c2 = cophenetic_heights(
            &agglomerate(
                &pairwise_distances(&Matrix::from_rows(&permuted).unwrap()).unwrap(),
                kind,
            )
            .unwrap(),
        );
        for i in 0..n {
            for j in 0..n {
                assert!(
                    close(c2.get(i, j), c1.get(perm[i], perm[j]), 1e-9),
                    "{kind}"
                );
            }
        }
    }
}

#[test]
fn reducible_cophenetic_is_ultrametric() {
    let mut r = rng(15);
    let rows = random_matrix(&mut r, 20, 4);
    let dm = pairwise_distances(&rows).unwrap();
    for kind in LinkageKind::REDUCIBLE {
        let c = cophenetic_heights(&agglomerate(&dm, kind).unwrap());
        for i in 0..20 {
            for j in 0..20 {
                for k in 0..20 {
                    assert!(c.get(i, j) <= c.get(i, k).max(c.get(k, j)) + 1e-9);
                }
            }
        }
    }
}
