use serde::{Deserialize, Serialize};

use super::ReportError;
use crate::ingest::Dataset;
use crate::taxonomy::{IndicatorResult, TaxonomyState};

/// Attributes whose compared values span less than this many raw units are
/// flagged as too close to explain a difference.
pub const DEFAULT_CLOSENESS: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub ids: Vec<u64>,
    pub names: Vec<String>,
    pub labels: Vec<String>,
    pub nl2: Vec<f64>,
    pub codes: Vec<String>,
    /// `values[attribute][entity]`, raw and unrounded.
    pub values: Vec<Vec<f64>>,
    pub close: Vec<bool>,
    pub threshold: f64,
}

impl Comparison {
    pub fn close_codes(&self) -> Vec<&str> {
        self.codes
            .iter()
            .zip(&self.close)
            .filter(|(_, &c)| c)
            .map(|(c, _)| c.as_str())
            .collect()
    }
}

/// Side-by-side raw values, labels and NL2 for the given entities.
///
/// `ts` and `ind` must follow the dataset's entity order.
pub fn compare_entities(
    ids: &[u64],
    d: &Dataset,
    ts: &TaxonomyState,
    ind: &IndicatorResult,
    threshold: f64,
) -> Result<Comparison, ReportError> {
    if ts.n() != d.len() || ind.values.len() != d.len() {
        return Err(ReportError::InconsistentInput(
            "dataset, taxonomy and indicator sizes differ".into(),
        ));
    }
    let positions: Vec<usize> = ids
        .iter()
        .map(|&id| d.position_of(id).ok_or(ReportError::UnknownEntity(id)))
        .collect::<Result<_, _>>()?;
    let codes = d.schema.codes();
    let values: Vec<Vec<f64>> = (0..codes.len())
        .map(|a| positions.iter().map(|&p| d.entities[p].values[a]).collect())
        .collect();
    let close = values
        .iter()
        .map(|v| {
            let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            v.is_empty() || hi - lo < threshold
        })
        .collect();
    Ok(Comparison {
        ids: ids.to_vec(),
        names: positions
            .iter()
            .map(|&p| d.entities[p].name.clone())
            .collect(),
        labels: positions
            .iter()
            .map(|&p| ts.effective_assignment[p].clone())
            .collect(),
        nl2: positions.iter().map(|&p| ind.values[p]).collect(),
        codes,
        values,
        close,
        threshold,
    })
}
