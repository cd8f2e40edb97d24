use serde::{Deserialize, Serialize};

use super::means::CategoryMeans;
use crate::diagnostics::{Diagnostic, Rule};
use crate::normalize::minmax_column;

/// Polygon data for radial charts: label means rescaled to 0..100 per
/// attribute across labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub codes: Vec<String>,
    pub labels: Vec<String>,
    /// `values[label][attribute]`.
    pub values: Vec<Vec<f64>>,
    pub diagnostics: Vec<Diagnostic>,
}

pub fn radial_profile(means: &CategoryMeans) -> RadialProfile {
    let l = means.labels.len();
    let mut values = vec![vec![0.0; means.codes.len()]; l];
    let mut diagnostics = Vec::new();
    for (a, code) in means.codes.iter().enumerate() {
        let col: Vec<f64> = means.means.iter().map(|row| row[a]).collect();
        let (scaled, lo, hi) = minmax_column(&col);
        if l > 0 && lo == hi {
            diagnostics.push(
                Diagnostic::new(
                    Rule::DegenerateProfile,
                    format!("all {l} label mean(s) equal {lo}; profile values set to 0"),
                )
                .attribute(code.clone()),
            );
        }
        for (row, v) in values.iter_mut().zip(scaled) {
            row[a] = v;
        }
    }
    RadialProfile {
        codes: means.codes.clone(),
        labels: means.labels.clone(),
        values,
        diagnostics,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::Scale;

    fn means(labels: &[&str], rows: Vec<Vec<f64>>) -> CategoryMeans {
        CategoryMeans {
            scale: Scale::Raw,
            codes: (1..=rows[0].len()).map(|i| format!("x{i}")).collect(),
            labels: labels.iter().map(|s| s.to_string()).collect(),
            counts: vec![1; labels.len()],
            means: rows,
            empty_labels: vec![],
        }
    }

    #[test]
    fn two_labels() {
        let p = radial_profile(&means(&["Ia", "IIb"], vec![vec![40.0], vec![60.0]]));
        assert_eq!(p.values, [vec![0.0], vec![100.0]]);
        assert!(p.diagnostics.is_empty());
    }

    #[test]
    fn single_label_is_degenerate() {
        let p = radial_profile(&means(&["Ia"], vec![vec![40.0, 3.0]]));
        assert_eq!(p.values, [vec![0.0, 0.0]]);
        assert_eq!(p.diagnostics.len(), 2);
        assert!(p
            .diagnostics
            .iter()
            .all(|d| d.rule == Rule::DegenerateProfile));
    }
}
