use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ReportError;

const SHIPPED: &str = include_str!("../../data/suitability_wash.json");

/// Policy-by-label scores in 1..=5.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawMatrix")]
pub struct SuitabilityMatrix {
    #[serde(default)]
    pub legend: BTreeMap<String, String>,
    pub labels: Vec<String>,
    pub policies: Vec<String>,
    /// `scores[policy][label]`.
    pub scores: Vec<Vec<u8>>,
}

#[derive(Deserialize)]
struct RawMatrix {
    #[serde(default)]
    legend: BTreeMap<String, String>,
    labels: Vec<String>,
    policies: Vec<String>,
    scores: Vec<Vec<u8>>,
}

impl TryFrom<RawMatrix> for SuitabilityMatrix {
    type Error = ReportError;

    fn try_from(r: RawMatrix) -> Result<Self, ReportError> {
        SuitabilityMatrix::new(r.legend, r.labels, r.policies, r.scores)
    }
}

fn unique(xs: &[String], what: &str) -> Result<(), ReportError> {
    let mut seen = BTreeSet::new();
    for x in xs {
        if !seen.insert(x) {
            return Err(ReportError::InvalidMatrix(format!(
                "duplicate {what} {x:?}"
            )));
        }
    }
    Ok(())
}

impl SuitabilityMatrix {
    pub fn new(
        legend: BTreeMap<String, String>,
        labels: Vec<String>,
        policies: Vec<String>,
        scores: Vec<Vec<u8>>,
    ) -> Result<Self, ReportError> {
        unique(&labels, "label")?;
        unique(&policies, "policy")?;
        if scores.len() != policies.len() {
            return Err(ReportError::InvalidMatrix(format!(
                "{} score rows for {} policies",
                scores.len(),
                policies.len()
            )));
        }
        for (p, row) in scores.iter().enumerate() {
            if row.len() != labels.len() {
                return Err(ReportError::InvalidMatrix(format!(
                    "row {p} has {} scores for {} labels",
                    row.len(),
                    labels.len()
                )));
            }
            if let Some(s) = row.iter().find(|s| !(1..=5).contains(*s)) {
                return Err(ReportError::InvalidMatrix(format!(
                    "score {s} outside 1..=5"
                )));
            }
        }
        Ok(SuitabilityMatrix {
            legend,
            labels,
            policies,
            scores,
        })
    }

    /// The water and sanitation matrix shipped with the crate.
    pub fn shipped() -> Self {
        serde_json::from_str(SHIPPED).expect("shipped suitability matrix is valid")
    }

    pub fn from_json(s: &str) -> Result<Self, ReportError> {
        serde_json::from_str(s).map_err(|e| ReportError::InvalidMatrix(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ReportError> {
        let s = std::fs::read_to_string(path)
            .map_err(|e| ReportError::InvalidMatrix(format!("{}: {e}", path.display())))?;
        Self::from_json(&s)
    }

    pub fn lookup(&self, label: &str, policy: &str) -> Result<u8, ReportError> {
        let l = self
            .labels
            .iter()
            .position(|x| x == label)
            .ok_or_else(|| ReportError::UnknownLabel(label.to_string()))?;
        let p = self
            .policies
            .iter()
            .position(|x| x == policy)
            .ok_or_else(|| ReportError::UnknownPolicy(policy.to_string()))?;
        Ok(self.scores[p][l])
    }
}
