//! Min-max rescaling to the 0..100 range and direction complements.
//!
//! Bounds are taken per attribute over the whole population, so each
//! non-degenerate column spans exactly `[0, 100]`. Attributes where high raw
//! values are unfavourable can then be flipped to `100 - z` so that larger
//! always means better.

use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagnostics::{Diagnostic, Rule};
use crate::ingest::{AttributeSchema, Dataset};
use crate::matrix::Matrix;

pub const SCALE: f64 = 100.0;

#[derive(Debug, Error, PartialEq)]
pub enum NormalizeError {
    #[error("dataset has no entities")]
    EmptyDataset,
    #[error("direction complement already applied")]
    AlreadyComplemented,
    #[error("schema has {schema} attributes, matrix has {matrix}")]
    SchemaMismatch { schema: usize, matrix: usize },
    #[error("row has {found} values, expected {expected}")]
    RowLength { found: usize, expected: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizedMatrix {
    pub codes: Vec<String>,
    pub z: Matrix,
    pub min: Vec<f64>,
    pub max: Vec<f64>,
    pub complemented: Vec<bool>,
    /// Set once [`apply_direction_complement`] has run, even if it flipped nothing.
    pub direction_applied: bool,
}

impl NormalizedMatrix {
    pub fn degenerate(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.codes.len()).filter(|&a| self.max[a] == self.min[a])
    }

    pub fn diagnostics(&self) -> Vec<Diagnostic> {
        self.degenerate()
            .map(|a| {
                Diagnostic::new(
                    Rule::DegenerateAttribute,
                    format!("constant value {}", self.min[a]),
                )
                .attribute(self.codes[a].clone())
            })
            .collect()
    }

    /// Normalizes a new raw row against the frozen population bounds,
    /// applying the same complements. Values outside the bounds fall outside
    /// `[0, 100]`.
    pub fn project(&self, raw: &[f64]) -> Result<Vec<f64>, NormalizeError> {
        if raw.len() != self.codes.len() {
            return Err(NormalizeError::RowLength {
                found: raw.len(),
                expected: self.codes.len(),
            });
        }
        Ok(raw
            .iter()
            .enumerate()
            .map(|(a, &x)| {
                let z = scale(x, self.min[a], self.max[a]);
                if self.complemented[a] {
                    SCALE - z
                } else {
                    z
                }
            })
            .collect())
    }

    /// CSV export: one `min`, `max` and `complemented` row followed by one row
    /// per entity.
    pub fn write_csv<W: Write>(&self, ids: &[u64], writer: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["id".to_string()];
        header.extend(self.codes.iter().cloned());
        w.write_record(&header)?;
        let bounds = |tag: &str, v: &[f64]| {
            let mut r = vec![tag.to_string()];
            r.extend(v.iter().map(|x| x.to_string()));
            r
        };
        w.write_record(bounds("min", &self.min))?;
        w.write_record(bounds("max", &self.max))?;
        let mut flags = vec!["complemented".to_string()];
        flags.extend(self.complemented.iter().map(|c| c.to_string()));
        w.write_record(&flags)?;
        for (id, row) in ids.iter().zip(self.z.iter_rows()) {
            let mut r = vec![id.to_string()];
            r.extend(row.iter().map(|x| x.to_string()));
            w.write_record(&r)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[inline]
fn scale(x: f64, min: f64, max: f64) -> f64 {
    if max == min {
        0.0
    } else {
        (x - min) / (max - min) * SCALE
    }
}

/// Rescales one column to `[0, 100]`, returning `(z, min, max)`.
/// A constant column maps to all zeros.
pub fn minmax_column(values: &[f64]) -> (Vec<f64>, f64, f64) {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (
        values.iter().map(|&x| scale(x, min, max)).collect(),
        min,
        max,
    )
}

/// Per-attribute min-max normalization of the raw values.
pub fn minmax_normalize(d: &Dataset) -> Result<NormalizedMatrix, NormalizeError> {
    minmax_normalize_matrix(&d.raw_matrix(), d.schema.codes())
}

pub fn minmax_normalize_matrix(
    x: &Matrix,
    codes: Vec<String>,
) -> Result<NormalizedMatrix, NormalizeError> {
    if x.rows() == 0 {
        return Err(NormalizeError::EmptyDataset);
    }
    if codes.len() != x.cols() {
        return Err(NormalizeError::SchemaMismatch {
            schema: codes.len(),
            matrix: x.cols(),
        });
    }
    let mut z = Matrix::zeros(x.rows(), x.cols());
    let mut min = Vec::with_capacity(x.cols());
    let mut max = Vec::with_capacity(x.cols());
    for a in 0..x.cols() {
        let col: Vec<f64> = x.column(a).collect();
        let (scaled, lo, hi) = minmax_column(&col);
        for (r, v) in scaled.into_iter().enumerate() {
            z.set(r, a, v);
        }
        min.push(lo);
        max.push(hi);
    }
    for (a, code) in codes.iter().enumerate() {
        if min[a] == max[a] {
            log::warn!("attribute {code} is constant ({}); mapped to 0", min[a]);
        }
    }
    Ok(NormalizedMatrix {
        complemented: vec![false; codes.len()],
        codes,
        z,
        min,
        max,
        direction_applied: false,
    })
}

/// Replaces `z` with `100 - z` for every favourable-low attribute.
pub fn apply_direction_complement(
    nm: &NormalizedMatrix,
    schema: &AttributeSchema,
) -> Result<NormalizedMatrix, NormalizeError> {
    if nm.direction_applied {
        return Err(NormalizeError::AlreadyComplemented);
    }
    if schema.len() != nm.codes.len() {
        return Err(NormalizeError::SchemaMismatch {
            schema: schema.len(),
            matrix: nm.codes.len(),
        });
    }
    let mask = schema.favourable_low_mask();
    let mut out = nm.clone();
    for r in 0..out.z.rows() {
        for (a, &flip) in mask.iter().enumerate() {
            if flip {
                out.z.set(r, a, SCALE - nm.z.get(r, a));
            }
        }
    }
    out.complemented = mask;
    out.direction_applied = true;
    Ok(out)
}
