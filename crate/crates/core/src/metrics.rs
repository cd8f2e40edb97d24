//! Partition agreement.

use std::collections::HashMap;
use std::hash::Hash;

fn pairs(x: u64) -> f64 {
    (x * x.saturating_sub(1) / 2) as f64
}

/// Adjusted Rand index between two labelings of the same items.
///
/// Returns 1.0 when both labelings induce the same partition, including the
/// degenerate cases where the chance correction is undefined. Panics if the
/// lengths differ.
pub fn adjusted_rand_index<A: Eq + Hash, B: Eq + Hash>(a: &[A], b: &[B]) -> f64 {
    assert_eq!(a.len(), b.len(), "labelings must cover the same items");
    let mut table: HashMap<(&A, &B), u64> = HashMap::new();
    let mut rows: HashMap<&A, u64> = HashMap::new();
    let mut cols: HashMap<&B, u64> = HashMap::new();
    for (x, y) in a.iter().zip(b) {
        *table.entry((x, y)).or_default() += 1;
        *rows.entry(x).or_default() += 1;
        *cols.entry(y).or_default() += 1;
    }
    let index: f64 = table.values().map(|&c| pairs(c)).sum();
    let sum_a: f64 = rows.values().map(|&c| pairs(c)).sum();
    let sum_b: f64 = cols.values().map(|&c| pairs(c)).sum();
    let total = pairs(a.len() as u64);
    if total == 0.0 {
        return 1.0;
    }
    let expected = sum_a * sum_b / total;
    let max = (sum_a + sum_b) / 2.0;
    if max == expected {
        return if sum_a == sum_b && index == sum_a {
            1.0
        } else {
            0.0
        };
    }
    (index - expected) / (max - expected)
}
