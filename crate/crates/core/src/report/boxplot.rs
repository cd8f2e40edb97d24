use serde::{Deserialize, Serialize};

use super::means::{check_rows, label_order};
use super::ReportError;
use crate::matrix::Matrix;
use crate::taxonomy::TaxonomyState;

pub const FENCE_FACTOR: f64 = 1.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outlier {
    /// Entity id, or the input position for [`boxplot_stats`].
    pub entity_id: u64,
    pub value: f64,
}

/// Tukey box plot. Quartiles are medians of the lower and upper halves, each
/// half including the median when the count is odd.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxplotSummary {
    pub n: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub whisker_low: f64,
    pub whisker_high: f64,
    pub outliers: Vec<Outlier>,
}

fn median_sorted(v: &[f64]) -> f64 {
    let m = v.len();
    if m % 2 == 1 {
        v[m / 2]
    } else {
        (v[m / 2 - 1] + v[m / 2]) / 2.0
    }
}

pub fn boxplot_stats(values: &[f64]) -> Result<BoxplotSummary, ReportError> {
    let pairs: Vec<(u64, f64)> = values
        .iter()
        .enumerate()
        .map(|(i, &v)| (i as u64, v))
        .collect();
    boxplot_stats_with_ids(&pairs)
}

pub fn boxplot_stats_with_ids(values: &[(u64, f64)]) -> Result<BoxplotSummary, ReportError> {
    if values.is_empty() {
        return Err(ReportError::EmptyInput);
    }
    if values.iter().any(|(_, v)| !v.is_finite()) {
        return Err(ReportError::InconsistentInput("non-finite value".into()));
    }
    let mut v: Vec<f64> = values.iter().map(|&(_, x)| x).collect();
    v.sort_by(f64::total_cmp);
    let m = v.len();
    let half = m / 2;
    let (lower, upper) = if m % 2 == 1 {
        (&v[..=half], &v[half..])
    } else {
        (&v[..half], &v[half..])
    };
    let q1 = median_sorted(lower);
    let q3 = median_sorted(upper);
    let iqr = q3 - q1;
    let lo_fence = q1 - FENCE_FACTOR * iqr;
    let hi_fence = q3 + FENCE_FACTOR * iqr;
    let inside = v
        .iter()
        .copied()
        .filter(|&x| x >= lo_fence && x <= hi_fence);
    let whisker_low = inside.clone().fold(f64::INFINITY, f64::min);
    let whisker_high = inside.fold(f64::NEG_INFINITY, f64::max);
    let mut outliers: Vec<Outlier> = values
        .iter()
        .filter(|&&(_, x)| x < lo_fence || x > hi_fence)
        .map(|&(entity_id, value)| Outlier { entity_id, value })
        .collect();
    outliers.sort_by(|a, b| {
        a.value
            .total_cmp(&b.value)
            .then(a.entity_id.cmp(&b.entity_id))
    });
    Ok(BoxplotSummary {
        n: m,
        min: v[0],
        q1,
        median: median_sorted(&v),
        q3,
        max: v[m - 1],
        whisker_low,
        whisker_high,
        outliers,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelBoxplots {
    pub label: String,
    /// One summary per attribute, in code order.
    pub attributes: Vec<BoxplotSummary>,
}

/// Box plots of every attribute within every non-empty label.
pub fn category_boxplots(
    x: &Matrix,
    codes: &[String],
    ts: &TaxonomyState,
) -> Result<Vec<LabelBoxplots>, ReportError> {
    check_rows(x, codes, ts)?;
    let mut out = Vec::new();
    for label in label_order(ts) {
        let members = ts.members_of(&label);
        if members.is_empty() {
            continue;
        }
        let attributes = (0..x.cols())
            .map(|a| {
                let pairs: Vec<(u64, f64)> = members
                    .iter()
                    .map(|&p| (ts.entity_ids[p], x.get(p, a)))
                    .collect();
                boxplot_stats_with_ids(&pairs)
            })
            .collect::<Result<_, _>>()?;
        out.push(LabelBoxplots { label, attributes });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn one_to_five() {
        let b = boxplot_stats(&[5.0, 3.0, 1.0, 4.0, 2.0]).unwrap();
        assert_eq!((b.q1, b.median, b.q3), (2.0, 3.0, 4.0));
        assert_eq!((b.whisker_low, b.whisker_high), (1.0, 5.0));
        assert!(b.outliers.is_empty());
    }

    #[test]
    fn constant() {
        let b = boxplot_stats(&[5.0; 4]).unwrap();
        assert_eq!((b.q1, b.median, b.q3), (5.0, 5.0, 5.0));
        assert!(b.outliers.is_empty());
    }

    #[test]
    fn flags_100() {
        let b = boxplot_stats(&[1.0, 2.0, 3.0, 4.0, 100.0]).unwrap();
        assert_eq!(
            b.outliers,
            [Outlier {
                entity_id: 4,
                value: 100.0
            }]
        );
        assert_eq!(b.whisker_high, 4.0);
    }

    #[test]
    fn single_and_empty() {
        let b = boxplot_stats(&[7.0]).unwrap();
        assert_eq!(
            (b.q1, b.median, b.q3, b.whisker_low, b.whisker_high),
            (7.0, 7.0, 7.0, 7.0, 7.0)
        );
        assert_eq!(boxplot_stats(&[]), Err(ReportError::EmptyInput));
    }

    proptest! {
        #[test]
        fn summary_invariants(v in prop::collection::vec(-1e3f64..1e3, 1..60)) {
            let b = boxplot_stats(&v).unwrap();
            prop_assert!(b.q1 <= b.median && b.median <= b.q3);
            prop_assert!(b.min <= b.whisker_low && b.whisker_high <= b.max);
            let iqr = b.q3 - b.q1;
            for o in &b.outliers {
                prop_assert!(o.value < b.q1 - 1.5 * iqr || o.value > b.q3 + 1.5 * iqr);
            }
            prop_assert_eq!(b.outliers.len() + v.iter().filter(|&&x| x >= b.whisker_low && x <= b.whisker_high).count(), v.len());
        }
    }
}
