//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::fs;
use std::time::Instant;

use common::*;
use municlust::cluster::{
    agglomerate, agglomerate_with, cophenetic_heights, pairwise_distances, LinkageKind, Strategy,
};
use municlust::fixture::{gaussian_blobs, Fixture};
use municlust::ingest::write_csv;
use municlust::matrix::Matrix;
use municlust::metrics::adjusted_rand_index;
use municlust::normalize::minmax_normalize_matrix;
use municlust::pipeline::{run_pipeline, PipelineConfig};
use municlust::report::{boxplot_stats, compare_entities, SuitabilityMatrix, DEFAULT_CLOSENESS};
use municlust::taxonomy::{
    cut_tree, nl2_values, partition_report, CutRequest, IndicatorConfig, IndicatorResult,
};
use rand::Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn codes(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("x{i}")).collect()
}

/// The 100 random datasets shared by the clustering and normalization criteria.
fn random_datasets() -> Vec<Matrix> {
    let mut r = rng(0xACCE);
    (0..100)
        .map(|_| {
            let n = r.random_range(2..=40);
            random_matrix(&mut r, n, 15)
        })
        .collect()
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for (i, raw) in random_datasets().iter().enumerate() {
        let z = minmax_normalize_matrix(raw, codes(15)).unwrap();
        let dm = pairwise_distances(&z.z).unwrap();
        for kind in LinkageKind::REDUCIBLE {
            let fast = agglomerate_with(&dm, kind, Strategy::NnChain).map_err(|e| e.to_string())?;
            let slow = agglomerate_with(&dm, kind, Strategy::Naive).map_err(|e| e.to_string())?;
            check(merge_sets(&fast) == merge_sets(&slow), || {
                format!("dataset {i} {kind}: merge topology differs")
            })?;
            for (a, b) in fast.merges.iter().zip(&slow.merges) {
                worst = worst.max((a.height - b.height).abs());
            }
            let (c1, c2) = (cophenetic_heights(&fast), cophenetic_heights(&slow));
            for (a, b) in c1.condensed().iter().zip(c2.condensed()) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    check(worst <= 1e-9, || {
        format!("max height difference {worst:e} exceeds 1e-9")
    })?;
    check(secs < 60.0, || format!("took {secs:.1}s"))?;
    Ok(format!(
        "100 datasets x 4 linkages, max |dh| = {worst:e}, {secs:.2}s"
    ))
}

fn single_linkage_mst() -> Outcome {
    let mut r = rng(0x357);
    let mut worst = 0.0f64;
    for i in 0..50 {
        let n = r.random_range(2..=30);
        let rows = random_matrix(&mut r, n, 15);
        let t = agglomerate(&pairwise_distances(&rows).unwrap(), LinkageKind::Single).unwrap();
        let (h, w) = (t.heights(), mst_weights(&rows));
        check(h.len() == w.len(), || {
            format!("instance {i}: {} heights, {} edges", h.len(), w.len())
        })?;
        for (a, b) in h.iter().zip(&w) {
            worst = worst.max((a - b).abs());
        }
    }
    check(worst <= 1e-9, || format!("max difference {worst:e}"))?;
    Ok(format!("50 instances, max |dh| = {worst:e}"))
}

fn normalization() -> Outcome {
    let mut worst = 0.0f64;
    let mut columns = 0;
    for (i, raw) in random_datasets().iter().enumerate() {
        let z = minmax_normalize_matrix(raw, codes(15)).unwrap();
        for a in 0..15 {
            if z.max[a] == z.min[a] {
                continue;
            }
            columns += 1;
            let col: Vec<f64> = z.z.column(a).collect();
            let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            check(lo == 0.0 && hi == 100.0, || {
                format!("dataset {i} column {a}: range [{lo}, {hi}]")
            })?;
        }
        let z2 = minmax_normalize_matrix(&raw.map(|x| 3.0 * x + 7.0), codes(15)).unwrap();
        for (p, q) in z.z.as_slice().iter().zip(z2.z.as_slice()) {
            worst = worst.max((p - q).abs());
        }
    }
    check(worst <= 1e-9, || format!("affine deviation {worst:e}"))?;
    Ok(format!(
        "{columns} columns hit 0 and 100 exactly; x->3x+7 max |dz| = {worst:e} (tolerance 1e-9)"
    ))
}

fn random_weights(r: &mut rand_chacha::ChaCha8Rng, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| r.random_range(0.0..1.0)).collect();
    let s: f64 = w.iter().sum();
    let mut w: Vec<f64> = w.iter().map(|x| x / s).collect();
    let rest: f64 = w[1..].iter().sum();
    w[0] = 1.0 - rest;
    w
}

fn nl2_properties() -> Outcome {
    let mut r = rng(0x2121);
    let mut worst = 0.0f64;
    for inst in 0..20 {
        let z = random_matrix(&mut r, 30, 15);
        let w = random_weights(&mut r, 15);
        let cfg = IndicatorConfig::new(w.clone()).map_err(|e| e.to_string())?;
        let v = nl2_values(&z, cfg.weights());
        for (row, &got) in z.iter_rows().zip(&v) {
            // Summed from the last attribute to the first.
            let want = row
                .iter()
                .zip(&w)
                .rev()
                .map(|(x, wi)| wi * x * x)
                .sum::<f64>()
                .sqrt();
            worst = worst.max((got - want).abs());
            check((0.0..=100.0).contains(&got), || {
                format!("instance {inst}: {got} out of [0, 100]")
            })?;
        }
        for a in 0..15 {
            let one = nl2_values(&z, IndicatorConfig::one_hot(15, a).unwrap().weights());
            check(one.iter().zip(z.column(a)).all(|(x, y)| *x == y), || {
                format!("instance {inst}: one-hot {a} inexact")
            })?;
        }
        let c = r.random_range(0.1..10.0);
        let scaled = nl2_values(&z.map(|x| x * c), cfg.weights());
        let rank = |xs: &[f64]| {
            let mut idx: Vec<usize> = (0..xs.len()).collect();
            idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]).then(a.cmp(&b)));
            idx
        };
        check(rank(&v) == rank(&scaled), || {
            format!("instance {inst}: ranking changed under x{c}")
        })?;
    }
    let edge = nl2_values(
        &Matrix::from_rows(&[[100.0; 15], [0.0; 15]]).unwrap(),
        &[1.0 / 15.0; 15],
    );
    check(edge == [100.0, 0.0], || {
        format!("constant rows gave {edge:?}")
    })?;
    check(worst <= 1e-12, || format!("oracle deviation {worst:e}"))?;
    Ok(format!(
        "20 instances, max |d| vs oracle = {worst:e}; bounds, one-hot and ranking hold"
    ))
}

/// Hinge-depth formulation of the quartiles.
fn boxplot_oracle(values: &[f64]) -> (f64, f64, f64, f64, f64, Vec<f64>) {
    let mut x = values.to_vec();
    x.sort_by(f64::total_cmp);
    let n = x.len();
    let at_depth = |d: f64, from_top: bool| {
        let (lo, hi) = (d.floor() as usize - 1, d.ceil() as usize - 1);
        if from_top {
            (x[n - 1 - lo] + x[n - 1 - hi]) / 2.0
        } else {
            (x[lo] + x[hi]) / 2.0
        }
    };
    let median_depth = (n as f64 + 1.0) / 2.0;
    let hinge_depth = (median_depth.floor() + 1.0) / 2.0;
    let (q1, med, q3) = (
        at_depth(hinge_depth, false),
        at_depth(median_depth, false),
        at_depth(hinge_depth, true),
    );
    let (lf, uf) = (q1 - 1.5 * (q3 - q1), q3 + 1.5 * (q3 - q1));
    let inside: Vec<f64> = x.iter().copied().filter(|v| *v >= lf && *v <= uf).collect();
    let outliers: Vec<f64> = x.iter().copied().filter(|v| *v < lf || *v > uf).collect();
    (q1, med, q3, inside[0], inside[inside.len() - 1], outliers)
}

fn boxplots() -> Outcome {
    let mut r = rng(0xB0C5);
    let mut inputs: Vec<Vec<f64>> = vec![vec![1.0, 2.0, 3.0, 4.0, 100.0]];
    while inputs.len() < 1000 {
        let n = r.random_range(1..=60);
        let heavy = r.random_bool(0.3);
        inputs.push(
            (0..n)
                .map(|_| {
                    let v: f64 = r.random_range(0.0..10.0);
                    if heavy && r.random_bool(0.1) {
                        v * 50.0
                    } else if r.random_bool(0.2) {
                        v.round()
                    } else {
                        v
                    }
                })
                .collect(),
        );
    }
    let mut outliers = 0;
    for (i, v) in inputs.iter().enumerate() {
        let b = boxplot_stats(v).map_err(|e| e.to_string())?;
        let (q1, med, q3, wl, wh, out) = boxplot_oracle(v);
        let got: Vec<f64> = {
            let mut o: Vec<f64> = b.outliers.iter().map(|o| o.value).collect();
            o.sort_by(f64::total_cmp);
            o
        };
        check(
            (b.q1, b.median, b.q3, b.whisker_low, b.whisker_high) == (q1, med, q3, wl, wh)
                && got == out,
            || format!("input {i} {v:?}: got {b:?}"),
        )?;
        outliers += out.len();
    }
    let special = boxplot_stats(&[1.0, 2.0, 3.0, 4.0, 100.0]).unwrap();
    check(
        special.outliers.len() == 1 && special.outliers[0].value == 100.0,
        || "100 not flagged".into(),
    )?;
    Ok(format!("1000 inputs match the hinge-depth oracle ({outliers} outliers); 100 flagged in {{1,2,3,4,100}}"))
}

fn cut_contracts() -> Outcome {
    let mut r = rng(0xC07);
    let mut trees = 0;
    for i in 0..40 {
        let n = r.random_range(2..=40);
        let kind = LinkageKind::ALL[i % 6];
        let rows = random_matrix(&mut r, n, 15);
        let t = agglomerate(&pairwise_distances(&rows).unwrap(), kind).unwrap();
        for k in 1..=n {
            let g = cut_tree(&t, CutRequest::ByCount(k))
                .map_err(|e| e.to_string())?
                .group_count();
            check(g == k, || {
                format!("tree {i} ({kind}, n={n}): k={k} gave {g} groups")
            })?;
        }
        let top = t.heights().into_iter().fold(0.0, f64::max);
        let mut last = usize::MAX;
        for s in 0..50 {
            let h = top * (s as f64 / 49.0);
            let g = cut_tree(&t, CutRequest::ByHeight(h))
                .map_err(|e| e.to_string())?
                .group_count();
            check(g <= last, || {
                format!("tree {i} ({kind}): {g} groups at {h} after {last}")
            })?;
            last = g;
        }
        trees += 1;
    }
    Ok(format!(
        "{trees} random trees, all six linkages; every k exact; 50-threshold sweeps monotone"
    ))
}

fn blob_recovery() -> Outcome {
    let sigma = 1.0;
    let centres = vec![vec![0.0, 0.0], vec![10.0, 0.0], vec![5.0, 75f64.sqrt()]];
    let mut perfect = 0;
    for seed in 0..20 {
        let (m, truth) = gaussian_blobs(seed, &centres, 20, sigma);
        let t = agglomerate(&pairwise_distances(&m).unwrap(), LinkageKind::Ward).unwrap();
        let cut = cut_tree(&t, CutRequest::ByCount(3)).unwrap();
        let ari = adjusted_rand_index(&truth, &cut.assignment);
        check(ari == 1.0, || format!("seed {seed}: ARI {ari}"))?;
        perfect += 1;
    }
    Ok(format!(
        "{perfect}/20 seeds with ARI = 1.0 (60 points, 3 blobs 10 sigma apart, Ward, k = 3)"
    ))
}

fn fixture_arithmetic() -> Outcome {
    let f = Fixture::reference();
    let ts = f.taxonomy();
    let rep = partition_report(&ts, Some(&f.populations));
    let expect = [("I", 27, 22.46), ("II", 299, 73.68), ("III", 40, 3.86)];
    for (c, count, share) in expect {
        let row = rep
            .category(c)
            .ok_or_else(|| format!("category {c} missing"))?;
        check(row.count == count, || {
            format!("category {c}: {} entities, expected {count}", row.count)
        })?;
        let s = row.share.unwrap();
        check((s - share).abs() <= 0.01, || {
            format!("category {c}: share {s}, expected {share}")
        })?;
    }
    check(
        rep.total == 366 && rep.counts_consistent && rep.shares_consistent,
        || format!("{rep:?}"),
    )?;
    Ok("I/II/III = 27/299/40 of 366; shares 22.46/73.68/3.86 within 0.01".into())
}

fn suitability_scores() -> Outcome {
    let m = SuitabilityMatrix::shipped();
    let labels = ["Ia", "Ib", "IIa", "IIb", "IIIa", "IIIb", "IIIc"];
    let rows: [(&str, [u8; 7]); 5] = [
        ("Designing / building / improving large and medium water & sanitation infrastructure systems", [5, 5, 5, 5, 3, 2, 2]),
        ("Designing / building / improving small and domestic water & sanitation systems", [3, 3, 3, 3, 5, 5, 5]),
        ("Providing information to ensure safe water, sanitation, and hygiene practices at household level through workshops", [4, 4, 4, 4, 5, 5, 5]),
        ("Providing information to ensure safe water, sanitation and hygiene practices at household level using TICs", [5, 5, 4, 3, 2, 2, 2]),
        ("Humanitarian assistance and donations on WASH services", [1, 1, 1, 1, 5, 5, 5]),
    ];
    let mut cells = 0;
    for (policy, scores) in rows {
        for (label, want) in labels.iter().zip(scores) {
            let got = m.lookup(label, policy).map_err(|e| e.to_string())?;
            check(got == want, || {
                format!("({label}, {policy}): {got}, expected {want}")
            })?;
            cells += 1;
        }
    }
    check(m.labels.len() * m.policies.len() == 35, || {
        "shipped matrix is not 5 x 7".into()
    })?;
    Ok(format!("{cells}/35 cells match"))
}

fn pinned_entities() -> Outcome {
    let f = Fixture::reference();
    let ts = f.taxonomy();
    let ind = IndicatorResult {
        values: vec![0.0; 366],
        weights: vec![],
    };
    let c = compare_entities(&[170, 200, 206], &f.dataset, &ts, &ind, DEFAULT_CLOSENESS)
        .map_err(|e| e.to_string())?;
    let printed: [[f64; 3]; 15] = [
        [77.77, 91.24, 79.14],
        [69.80, 99.90, 98.39],
        [24.85, 10.64, 10.90],
        [9.06, 3.0, 3.19],
        [67.0, 47.0, 51.0],
        [54.0, 54.0, 50.0],
        [0.44, 1.17, 0.29],
        [15.05, 5.56, 6.39],
        [59.0, 39.0, 41.0],
        [49.37, 74.75, 74.59],
        [94.76, 95.20, 92.05],
        [77.33, 90.17, 86.13],
        [76.53, 95.43, 94.45],
        [12.15, 50.20, 46.07],
        [7.28, 47.38, 42.50],
    ];
    for (a, row) in printed.iter().enumerate() {
        check(c.values[a] == row, || {
            format!("x{}: {:?}, expected {row:?}", a + 1, c.values[a])
        })?;
    }
    check(c.labels == ["IIb", "Ia", "Ia"], || {
        format!("labels {:?}", c.labels)
    })?;
    check(c.names == ["Moran", "Baruta", "El Hatillo"], || {
        format!("names {:?}", c.names)
    })?;
    Ok(format!(
        "45 values verbatim; close attributes: {}",
        c.close_codes().join(", ")
    ))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let input = dir.path().join("fixture.csv");
    let mut buf = Vec::new();
    write_csv(&Fixture::reference().dataset, &mut buf).map_err(|e| e.to_string())?;
    fs::write(&input, buf).map_err(|e| e.to_string())?;
    let run = |out: &str, extra: bool| {
        let cfg = PipelineConfig {
            input: input.clone(),
            cut: CutRequest::ByCount(16),
            extra_charts: extra,
            highlight: vec![170, 200, 206],
            output_dir: dir.path().join(out),
            ..Default::default()
        };
        run_pipeline(&cfg).map_err(|e| e.to_string())
    };
    let mut compared = 0;
    for extra in [false, true] {
        let a = run(if extra { "a2" } else { "a" }, extra)?;
        let b = run(if extra { "b2" } else { "b" }, extra)?;
        let expected = if extra { 8 } else { 6 };
        check(a.artifacts.len() == expected, || {
            format!("{} artifacts, expected {expected}", a.artifacts.len())
        })?;
        for (p, q) in a.artifacts.iter().zip(&b.artifacts) {
            let (x, y) = (fs::read(p).unwrap(), fs::read(q).unwrap());
            check(x == y, || format!("{} differs between runs", p.display()))?;
            compared += 1;
        }
    }
    Ok(format!(
        "{compared} artifacts byte-identical across reruns (6 default, 8 with extra charts)"
    ))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("oracle equivalence (NN-chain vs naive)", oracle_equivalence),
        ("single linkage equals MST", single_linkage_mst),
        ("normalization bounds and affine invariance", normalization),
        ("NL2 oracle, bounds, one-hot, ranking", nl2_properties),
        ("box-plot statistics", boxplots),
        ("cut contracts", cut_contracts),
        ("Gaussian blob recovery", blob_recovery),
        ("fixture partition arithmetic", fixture_arithmetic),
        ("suitability matrix", suitability_scores),
        ("entity comparison", pinned_entities),
        ("pipeline determinism", determinism),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        match f() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
