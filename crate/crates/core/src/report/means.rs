use serde::{Deserialize, Serialize};

use super::ReportError;
use crate::matrix::Matrix;
use crate::taxonomy::TaxonomyState;

/// Which matrix the statistics were computed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    #[default]
    Raw,
    Normalized,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryMeans {
    pub scale: Scale,
    pub codes: Vec<String>,
    /// Labels with at least one member, in declared order.
    pub labels: Vec<String>,
    pub counts: Vec<usize>,
    /// `means[label][attribute]`.
    pub means: Vec<Vec<f64>>,
    /// Declared labels without members; reported, not averaged.
    pub empty_labels: Vec<String>,
}

impl CategoryMeans {
    pub fn mean(&self, label: &str, code: &str) -> Option<f64> {
        let l = self.labels.iter().position(|x| x == label)?;
        let a = self.codes.iter().position(|x| x == code)?;
        Some(self.means[l][a])
    }
}

pub(crate) fn check_rows(
    x: &Matrix,
    codes: &[String],
    ts: &TaxonomyState,
) -> Result<(), ReportError> {
    if x.rows() != ts.n() {
        return Err(ReportError::InconsistentInput(format!(
            "{} rows but {} labelled entities",
            x.rows(),
            ts.n()
        )));
    }
    if x.cols() != codes.len() {
        return Err(ReportError::InconsistentInput(format!(
            "{} columns but {} attribute codes",
            x.cols(),
            codes.len()
        )));
    }
    Ok(())
}

/// Labels in declared order followed by any undeclared label in use.
pub(crate) fn label_order(ts: &TaxonomyState) -> Vec<String> {
    let mut out = ts.labels.clone();
    for l in &ts.effective_assignment {
        if !out.contains(l) {
            out.push(l.clone());
        }
    }
    out
}

/// Arithmetic mean of every attribute within every label.
pub fn category_means(
    x: &Matrix,
    codes: &[String],
    ts: &TaxonomyState,
    scale: Scale,
) -> Result<CategoryMeans, ReportError> {
    check_rows(x, codes, ts)?;
    let mut out = CategoryMeans {
        scale,
        codes: codes.to_vec(),
        labels: Vec::new(),
        counts: Vec::new(),
        means: Vec::new(),
        empty_labels: Vec::new(),
    };
    for label in label_order(ts) {
        let members = ts.members_of(&label);
        if members.is_empty() {
            out.empty_labels.push(label);
            continue;
        }
        let m = members.len() as f64;
        let means = (0..x.cols())
            .map(|a| members.iter().map(|&p| x.get(p, a)).sum::<f64>() / m)
            .collect();
        out.labels.push(label);
        out.counts.push(members.len());
        out.means.push(means);
    }
    Ok(out)
}
