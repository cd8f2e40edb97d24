use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::state::TaxonomyState;

const SHARE_TOLERANCE: f64 = 0.01;

/// Category of a subcategory label: the roman-numeral prefix of labels such
/// as `IIb`, otherwise the label itself.
pub fn category_of(label: &str) -> &str {
    let roman = label.len() - label.trim_start_matches(['I', 'V', 'X']).len();
    let rest = &label[roman..];
    if roman > 0 && rest.chars().all(|c| c.is_ascii_lowercase()) {
        &label[..roman]
    } else {
        label
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionRow {
    pub label: String,
    pub count: usize,
    pub population: Option<f64>,
    /// Percent of the total population.
    pub share: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionReport {
    /// Non-empty labels in declared order.
    pub labels: Vec<PartitionRow>,
    /// Categories in order of first appearance among `labels`.
    pub categories: Vec<PartitionRow>,
    pub total: usize,
    pub total_population: Option<f64>,
    pub counts_consistent: bool,
    pub shares_consistent: bool,
}

fn finish(rows: &mut [PartitionRow], total_pop: Option<f64>) {
    if let Some(t) = total_pop {
        for r in rows {
            r.share = r
                .population
                .map(|p| if t > 0.0 { 100.0 * p / t } else { 0.0 });
        }
    }
}

/// Counts per label and per category, with optional population sums.
/// `populations` is indexed by entity position.
pub fn partition_report(ts: &TaxonomyState, populations: Option<&[f64]>) -> PartitionReport {
    let mut by_label: BTreeMap<&str, (usize, f64)> = BTreeMap::new();
    for (i, l) in ts.effective_assignment.iter().enumerate() {
        let e = by_label.entry(l.as_str()).or_default();
        e.0 += 1;
        e.1 += populations.map_or(0.0, |p| p[i]);
    }
    // Declared labels first, then anything else in sorted order.
    let mut order: Vec<&str> = ts
        .labels
        .iter()
        .map(String::as_str)
        .filter(|l| by_label.contains_key(l))
        .collect();
    for l in by_label.keys() {
        if !order.contains(l) {
            order.push(l);
        }
    }

    let has_pop = populations.is_some();
    let mut labels: Vec<PartitionRow> = order
        .iter()
        .map(|l| PartitionRow {
            label: l.to_string(),
            count: by_label[l].0,
            population: has_pop.then_some(by_label[l].1),
            share: None,
        })
        .collect();

    let mut categories: Vec<PartitionRow> = Vec::new();
    for r in &labels {
        let c = category_of(&r.label);
        match categories.iter_mut().find(|x| x.label == c) {
            Some(x) => {
                x.count += r.count;
                x.population = x.population.zip(r.population).map(|(a, b)| a + b);
            }
            None => categories.push(PartitionRow {
                label: c.to_string(),
                count: r.count,
                population: r.population,
                share: None,
            }),
        }
    }

    let total_population = populations.map(|p| p.iter().sum::<f64>());
    finish(&mut labels, total_population);
    finish(&mut categories, total_population);

    let total = ts.n();
    let counts_consistent = labels.iter().map(|r| r.count).sum::<usize>() == total
        && categories.iter().map(|r| r.count).sum::<usize>() == total;
    let shares_consistent = match total_population {
        None => true,
        Some(_) => [&labels, &categories].iter().all(|rows| {
            let s: f64 = rows.iter().filter_map(|r| r.share).sum();
            (s - 100.0).abs() <= SHARE_TOLERANCE
        }),
    };
    PartitionReport {
        labels,
        categories,
        total,
        total_population,
        counts_consistent,
        shares_consistent,
    }
}

impl PartitionReport {
    pub fn category(&self, c: &str) -> Option<&PartitionRow> {
        self.categories.iter().find(|r| r.label == c)
    }

    pub fn label(&self, l: &str) -> Option<&PartitionRow> {
        self.labels.iter().find(|r| r.label == l)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taxonomy::{Cut, CutRequest};

    #[test]
    fn categories_from_labels() {
        assert_eq!(category_of("Ia"), "I");
        assert_eq!(category_of("IIIc"), "III");
        assert_eq!(category_of("II"), "II");
        assert_eq!(category_of("IV"), "IV");
        assert_eq!(category_of("coastal"), "coastal");
        assert_eq!(category_of("IIB"), "IIB");
        assert_eq!(category_of("3"), "3");
    }

    #[test]
    fn single_label_state() {
        let cut = Cut {
            request: CutRequest::ByCount(1),
            assignment: vec![1; 4],
        };
        let ts =
            TaxonomyState::new(vec![1, 2, 3, 4], cut, BTreeMap::from([(1, "IIa".into())])).unwrap();
        let r = partition_report(&ts, Some(&[1.0, 2.0, 3.0, 4.0]));
        assert_eq!(r.labels.len(), 1);
        assert_eq!(r.labels[0].share, Some(100.0));
        assert_eq!(r.category("II").unwrap().count, 4);
        assert!(r.counts_consistent && r.shares_consistent);
    }

    #[test]
    fn counts_and_shares() {
        let cut = Cut {
            request: CutRequest::ByCount(3),
            assignment: vec![1, 2, 2, 3],
        };
        let map = BTreeMap::from([(1, "Ia".into()), (2, "Ib".into()), (3, "IIa".into())]);
        let ts = TaxonomyState::new(vec![1, 2, 3, 4], cut, map).unwrap();
        let r = partition_report(&ts, Some(&[10.0, 20.0, 30.0, 40.0]));
        assert_eq!(r.category("I").unwrap().count, 3);
        assert_eq!(r.category("I").unwrap().share, Some(60.0));
        assert_eq!(r.label("IIa").unwrap().share, Some(40.0));
        let r = partition_report(&ts, None);
        assert!(r.labels.iter().all(|x| x.share.is_none()));
    }
}
