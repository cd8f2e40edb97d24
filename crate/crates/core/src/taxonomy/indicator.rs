use serde::{Deserialize, Serialize};

use super::state::TaxonomyState;
use super::TaxonomyError;
use crate::ingest::AttributeSchema;
use crate::matrix::Matrix;
use crate::normalize::NormalizedMatrix;

const WEIGHT_SUM_TOLERANCE: f64 = 1e-12;

/// Codes that receive double weight in the default water and sanitation
/// weighting: drinking water, under-5 mortality, extreme poverty,
/// adolescent mothers and primary education.
pub const EMPHASIZED: [&str; 5] = ["x1", "x3", "x5", "x8", "x13"];

/// Non-negative attribute weights summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawConfig")]
pub struct IndicatorConfig {
    weights: Vec<f64>,
}

#[derive(Deserialize)]
struct RawConfig {
    weights: Vec<f64>,
}

impl TryFrom<RawConfig> for IndicatorConfig {
    type Error = TaxonomyError;

    fn try_from(r: RawConfig) -> Result<Self, Self::Error> {
        IndicatorConfig::new(r.weights)
    }
}

impl IndicatorConfig {
    pub fn new(weights: Vec<f64>) -> Result<Self, TaxonomyError> {
        if weights.is_empty() {
            return Err(TaxonomyError::WeightsNotNormalized("no weights".into()));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(TaxonomyError::WeightsNotNormalized(format!(
                "weight {w} is negative or non-finite"
            )));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(TaxonomyError::WeightsNotNormalized(format!(
                "weights sum to {sum}"
            )));
        }
        Ok(IndicatorConfig { weights })
    }

    pub fn uniform(n: usize) -> Result<Self, TaxonomyError> {
        Self::new(vec![1.0 / n as f64; n])
    }

    /// Weight 1 on attribute `a`, 0 elsewhere.
    pub fn one_hot(n: usize, a: usize) -> Result<Self, TaxonomyError> {
        let mut w = vec![0.0; n];
        *w.get_mut(a).ok_or_else(|| {
            TaxonomyError::WeightsNotNormalized(format!("attribute {a} out of range"))
        })? = 1.0;
        Self::new(w)
    }

    /// 0.10 for each emphasized attribute present in the schema, the rest
    /// shared equally. For the fifteen-attribute default schema this is 0.10
    /// on x1, x3, x5, x8, x13 and 0.05 elsewhere. Schemas without any of the
    /// emphasized codes get uniform weights.
    pub fn default_for(schema: &AttributeSchema) -> Result<Self, TaxonomyError> {
        let emphasized: Vec<bool> = schema
            .attributes()
            .iter()
            .map(|a| EMPHASIZED.contains(&a.code.as_str()))
            .collect();
        let k = emphasized.iter().filter(|&&e| e).count();
        let n = schema.len();
        if k == 0 || k == n {
            return Self::uniform(n);
        }
        let rest = (1.0 - 0.10 * k as f64) / (n - k) as f64;
        Self::new(
            emphasized
                .iter()
                .map(|&e| if e { 0.10 } else { rest })
                .collect(),
        )
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorResult {
    pub values: Vec<f64>,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelSummary {
    pub label: String,
    pub count: usize,
    pub min: f64,
    pub median: f64,
    pub max: f64,
}

/// Weighted L2 norm of every row: `sqrt(Σ w[a] · z[a]²)`.
///
/// The result is clamped into the range spanned by the positively weighted
/// cells of the row, which bounds the exact value; this keeps rounding from
/// pushing an all-100 row above 100.
pub fn nl2_values(z: &Matrix, weights: &[f64]) -> Vec<f64> {
    z.iter_rows()
        .map(|row| {
            let mut sum = 0.0;
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for (&v, &w) in row.iter().zip(weights) {
                sum += w * v * v;
                if w > 0.0 {
                    lo = lo.min(v.abs());
                    hi = hi.max(v.abs());
                }
            }
            let r = sum.sqrt();
            if lo <= hi {
                r.clamp(lo, hi)
            } else {
                r
            }
        })
        .collect()
}

/// The NL2 indicator on a direction-complemented normalized matrix.
pub fn nl2(z: &NormalizedMatrix, cfg: &IndicatorConfig) -> Result<IndicatorResult, TaxonomyError> {
    if !z.direction_applied {
        return Err(TaxonomyError::NotComplemented);
    }
    if z.codes.len() != cfg.weights.len() {
        return Err(TaxonomyError::WeightsNotNormalized(format!(
            "{} weights for {} attributes",
            cfg.weights.len(),
            z.codes.len()
        )));
    }
    Ok(IndicatorResult {
        values: nl2_values(&z.z, &cfg.weights),
        weights: cfg.weights.clone(),
    })
}

impl IndicatorResult {
    /// Min, median and max NL2 per label, in declared label order. Labels
    /// without members are skipped.
    pub fn summarize(&self, ts: &TaxonomyState) -> Vec<LabelSummary> {
        ts.labels
            .iter()
            .filter_map(|label| {
                let mut v: Vec<f64> = ts
                    .members_of(label)
                    .iter()
                    .map(|&p| self.values[p])
                    .collect();
                if v.is_empty() {
                    return None;
                }
                v.sort_by(f64::total_cmp);
                let m = v.len();
                let median = if m % 2 == 1 {
                    v[m / 2]
                } else {
                    (v[m / 2 - 1] + v[m / 2]) / 2.0
                };
                Some(LabelSummary {
                    label: label.clone(),
                    count: m,
                    min: v[0],
                    median,
                    max: v[m - 1],
                })
            })
            .collect()
    }
}
