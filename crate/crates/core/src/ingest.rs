//! Attribute schemas, entity tables and their CSV/JSON encodings.
//!
//! A CSV table carries one header row made of the schema's attribute codes
//! plus the optional `id`, `name` and `parent` columns, in any order. A JSON
//! table is an object `{"schema": [...], "entities": [...]}` whose entries
//! mirror [`AttributeDef`] and [`EntityRecord`].

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{self, BufReader, Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagnostics::{Diagnostic, Rule};
use crate::matrix::Matrix;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("missing column \"{0}\"")]
    MissingColumn(String),
    #[error("non-numeric cell at row {row}, column \"{column}\": {value:?}")]
    NonNumericCell {
        row: usize,
        column: String,
        value: String,
    },
    #[error("invalid id at row {row}: {value:?}")]
    InvalidId { row: usize, value: String },
    #[error("duplicate entity id {0}")]
    DuplicateId(u64),
    #[error("need at least 2 entities, found {0}")]
    TooFewRows(usize),
    #[error("entity {id} has {found} values, schema declares {expected}")]
    LengthMismatch {
        id: u64,
        found: usize,
        expected: usize,
    },
    #[error("invalid schema: {0}")]
    InvalidSchema(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = IngestError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Units {
    Percentage,
    Rate,
    Ratio,
}

/// Whether high raw values are good news (`FavourableHigh`) or bad news.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    FavourableHigh,
    FavourableLow,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributeDef {
    pub code: String,
    pub label: String,
    pub units: Units,
    pub direction: Direction,
}

impl AttributeDef {
    pub fn new(code: &str, label: &str, units: Units, direction: Direction) -> Self {
        AttributeDef {
            code: code.to_string(),
            label: label.to_string(),
            units,
            direction,
        }
    }
}

/// Ordered attribute declarations. Codes are unique and non-empty.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<AttributeDef>", into = "Vec<AttributeDef>")]
pub struct AttributeSchema {
    attributes: Vec<AttributeDef>,
}

impl TryFrom<Vec<AttributeDef>> for AttributeSchema {
    type Error = IngestError;

    fn try_from(attributes: Vec<AttributeDef>) -> Result<Self> {
        AttributeSchema::new(attributes)
    }
}

impl From<AttributeSchema> for Vec<AttributeDef> {
    fn from(s: AttributeSchema) -> Self {
        s.attributes
    }
}

impl AttributeSchema {
    pub fn new(attributes: Vec<AttributeDef>) -> Result<Self> {
        if attributes.is_empty() {
            return Err(IngestError::InvalidSchema("no attributes".into()));
        }
        let mut seen = HashSet::new();
        for a in &attributes {
            if a.code.trim().is_empty() {
                return Err(IngestError::InvalidSchema("empty attribute code".into()));
            }
            if matches!(a.code.as_str(), "id" | "name" | "parent") {
                return Err(IngestError::InvalidSchema(format!(
                    "attribute code \"{}\" is reserved",
                    a.code
                )));
            }
            if !seen.insert(a.code.as_str()) {
                return Err(IngestError::InvalidSchema(format!(
                    "duplicate attribute code \"{}\"",
                    a.code
                )));
            }
        }
        Ok(AttributeSchema { attributes })
    }

    /// The fifteen water, sanitation and hygiene attributes `x1`..`x15`.
    ///
    /// `x3` (under-5 mortality), `x4` (underweight children), `x5` (extreme
    /// poverty) and `x8` (adolescent mothers) are the favourable-low ones.
    pub fn wash_default() -> Self {
        use Direction::*;
        use Units::*;
        let attrs = vec![
            AttributeDef::new(
                "x1",
                "Households with safely managed drinking water supplies (%)",
                Percentage,
                FavourableHigh,
            ),
            AttributeDef::new(
                "x2",
                "Households using safely managed sanitation services (%)",
                Percentage,
                FavourableHigh,
            ),
            AttributeDef::new(
                "x3",
                "Mortality rate for children under 5 years of age",
                Rate,
                FavourableLow,
            ),
            AttributeDef::new(
                "x4",
                "Children under 5 years of age who are underweight (%)",
                Percentage,
                FavourableLow,
            ),
            AttributeDef::new(
                "x5",
                "Households living below the extreme poverty line (%)",
                Percentage,
                FavourableLow,
            ),
            AttributeDef::new("x6", "Total employment rate", Rate, FavourableHigh),
            AttributeDef::new(
                "x7",
                "Share of national population (%)",
                Percentage,
                FavourableHigh,
            ),
            AttributeDef::new("x8", "Adolescent mothers (%)", Percentage, FavourableLow),
            AttributeDef::new("x9", "Demographic dependency ratio", Ratio, FavourableHigh),
            AttributeDef::new(
                "x10",
                "School attendance rate, ages 3 to 5",
                Rate,
                FavourableHigh,
            ),
            AttributeDef::new(
                "x11",
                "School attendance rate, ages 6 to 11",
                Rate,
                FavourableHigh,
            ),
            AttributeDef::new(
                "x12",
                "School attendance rate, ages 12 to 17",
                Rate,
                FavourableHigh,
            ),
            AttributeDef::new(
                "x13",
                "Population aged 15 to 64 with at least complete primary education (%)",
                Percentage,
                FavourableHigh,
            ),
            AttributeDef::new(
                "x14",
                "Households that have computers (%)",
                Percentage,
                FavourableHigh,
            ),
            AttributeDef::new(
                "x15",
                "Households that have internet access (%)",
                Percentage,
                FavourableHigh,
            ),
        ];
        AttributeSchema { attributes: attrs }
    }

    pub fn len(&self) -> usize {
        self.attributes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attributes.is_empty()
    }

    pub fn attributes(&self) -> &[AttributeDef] {
        &self.attributes
    }

    pub fn codes(&self) -> Vec<String> {
        self.attributes.iter().map(|a| a.code.clone()).collect()
    }

    pub fn index_of(&self, code: &str) -> Option<usize> {
        self.attributes.iter().position(|a| a.code == code)
    }

    /// One flag per attribute, true for favourable-low attributes.
    pub fn favourable_low_mask(&self) -> Vec<bool> {
        self.attributes
            .iter()
            .map(|a| a.direction == Direction::FavourableLow)
            .collect()
    }
}

impl Default for AttributeSchema {
    fn default() -> Self {
        AttributeSchema::wash_default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityRecord {
    pub id: u64,
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub parent: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub schema: AttributeSchema,
    pub entities: Vec<EntityRecord>,
}

impl Dataset {
    /// Checks the structural invariants: value counts, positive unique ids, n >= 2.
    pub fn new(schema: AttributeSchema, entities: Vec<EntityRecord>) -> Result<Self> {
        if entities.len() < 2 {
            return Err(IngestError::TooFewRows(entities.len()));
        }
        let mut ids = HashSet::with_capacity(entities.len());
        for (row, e) in entities.iter().enumerate() {
            if e.id == 0 {
                return Err(IngestError::InvalidId {
                    row: row + 1,
                    value: "0".into(),
                });
            }
            if e.values.len() != schema.len() {
                return Err(IngestError::LengthMismatch {
                    id: e.id,
                    found: e.values.len(),
                    expected: schema.len(),
                });
            }
            if !ids.insert(e.id) {
                return Err(IngestError::DuplicateId(e.id));
            }
        }
        Ok(Dataset { schema, entities })
    }

    pub fn len(&self) -> usize {
        self.entities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entities.is_empty()
    }

    pub fn ids(&self) -> Vec<u64> {
        self.entities.iter().map(|e| e.id).collect()
    }

    pub fn position_of(&self, id: u64) -> Option<usize> {
        self.entities.iter().position(|e| e.id == id)
    }

    /// Raw values as an entities x attributes matrix.
    pub fn raw_matrix(&self) -> Matrix {
        let cols = self.schema.len();
        let mut data = Vec::with_capacity(self.len() * cols);
        for e in &self.entities {
            data.extend_from_slice(&e.values);
        }
        Matrix::from_vec(self.len(), cols, data)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format \"{other}\" (expected csv or json)")),
        }
    }
}

impl Format {
    /// Guesses the format from a file extension, defaulting to CSV.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => Format::Json,
            _ => Format::Csv,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ParseOptions {
    /// Schema for CSV input. JSON input carries its own; when set, the
    /// embedded schema must declare every code listed here.
    pub schema: Option<AttributeSchema>,
    /// Accept `77,77` and `77,77%` style cells. CSV fields are then
    /// separated by `;`.
    pub decimal_comma: bool,
    /// Replace empty cells with the attribute mean instead of failing.
    pub impute_missing: bool,
}

/// Reads and validates a dataset file.
pub fn parse_dataset(path: &Path, format: Format, opts: &ParseOptions) -> Result<Dataset> {
    parse_dataset_reporting(path, format, opts).map(|(d, _)| d)
}

/// Like [`parse_dataset`], also returning imputation diagnostics.
pub fn parse_dataset_reporting(
    path: &Path,
    format: Format,
    opts: &ParseOptions,
) -> Result<(Dataset, Vec<Diagnostic>)> {
    let file = File::open(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let reader = BufReader::new(file);
    match format {
        Format::Csv => read_csv(reader, opts),
        Format::Json => read_json(reader, opts),
    }
}

fn parse_cell(raw: &str, decimal_comma: bool) -> Option<f64> {
    let s = raw.trim();
    let v = if decimal_comma {
        let s = s.strip_suffix('%').unwrap_or(s).trim_end();
        s.replace(',', ".").parse::<f64>().ok()?
    } else {
        s.parse::<f64>().ok()?
    };
    v.is_finite().then_some(v)
}

/// Parses CSV from any reader. Row numbers in errors are 1-based data rows.
pub fn read_csv<R: Read>(reader: R, opts: &ParseOptions) -> Result<(Dataset, Vec<Diagnostic>)> {
    let schema = opts.schema.clone().unwrap_or_default();
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(if opts.decimal_comma { b';' } else { b',' })
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let find = |name: &str| headers.iter().position(|h| h == name);

    let columns = schema
        .attributes()
        .iter()
        .map(|a| find(&a.code).ok_or_else(|| IngestError::MissingColumn(a.code.clone())))
        .collect::<Result<Vec<_>>>()?;
    let id_col = find("id");
    let name_col = find("name");
    let parent_col = find("parent");

    let mut entities = Vec::new();
    let mut missing: Vec<(usize, usize)> = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let row = i + 1;
        let id = match id_col {
            Some(c) => {
                let raw = record.get(c).unwrap_or("");
                match raw.parse::<u64>() {
                    Ok(v) if v > 0 => v,
                    _ => {
                        return Err(IngestError::InvalidId {
                            row,
                            value: raw.to_string(),
                        })
                    }
                }
            }
            None => row as u64,
        };
        let mut values = Vec::with_capacity(columns.len());
        for (a, &c) in columns.iter().enumerate() {
            let raw = record.get(c).unwrap_or("");
            if raw.is_empty() && opts.impute_missing {
                missing.push((entities.len(), a));
                values.push(f64::NAN);
                continue;
            }
            match parse_cell(raw, opts.decimal_comma) {
                Some(v) => values.push(v),
                None => {
                    return Err(IngestError::NonNumericCell {
                        row,
                        column: schema.attributes()[a].code.clone(),
                        value: raw.to_string(),
                    })
                }
            }
        }
        entities.push(EntityRecord {
            id,
            name: name_col
                .and_then(|c| record.get(c))
                .unwrap_or("")
                .to_string(),
            parent: parent_col
                .and_then(|c| record.get(c))
                .unwrap_or("")
                .to_string(),
            values,
        });
    }

    let diagnostics = impute(&schema, &mut entities, &missing)?;
    Ok((Dataset::new(schema, entities)?, diagnostics))
}

fn impute(
    schema: &AttributeSchema,
    entities: &mut [EntityRecord],
    missing: &[(usize, usize)],
) -> Result<Vec<Diagnostic>> {
    if missing.is_empty() {
        return Ok(Vec::new());
    }
    let mut means = HashMap::new();
    let mut diagnostics = Vec::with_capacity(missing.len());
    for &(row, a) in missing {
        let mean = match means.get(&a) {
            Some(&m) => m,
            None => {
                let present: Vec<f64> = entities
                    .iter()
                    .map(|e| e.values[a])
                    .filter(|v| !v.is_nan())
                    .collect();
                if present.is_empty() {
                    return Err(IngestError::NonNumericCell {
                        row: row + 1,
                        column: schema.attributes()[a].code.clone(),
                        value: String::new(),
                    });
                }
                let m = present.iter().sum::<f64>() / present.len() as f64;
                means.insert(a, m);
                m
            }
        };
        entities[row].values[a] = mean;
        let code = &schema.attributes()[a].code;
        diagnostics.push(
            Diagnostic::new(Rule::ImputedValue, format!("{code} set to {mean}"))
                .entity(entities[row].id)
                .attribute(code.clone()),
        );
    }
    Ok(diagnostics)
}

#[derive(Deserialize)]
struct RawDataset {
    schema: AttributeSchema,
    entities: Vec<RawEntity>,
}

#[derive(Deserialize)]
struct RawEntity {
    id: Option<u64>,
    #[serde(default)]
    name: String,
    #[serde(default)]
    parent: String,
    values: Vec<Option<f64>>,
}

/// Parses the JSON encoding from any reader.
pub fn read_json<R: Read>(reader: R, opts: &ParseOptions) -> Result<(Dataset, Vec<Diagnostic>)> {
    let raw: RawDataset = serde_json::from_reader(reader)?;
    if let Some(expected) = &opts.schema {
        for a in expected.attributes() {
            if raw.schema.index_of(&a.code).is_none() {
                return Err(IngestError::MissingColumn(a.code.clone()));
            }
        }
    }
    let schema = raw.schema;
    let mut missing = Vec::new();
    let mut entities = Vec::with_capacity(raw.entities.len());
    for (i, e) in raw.entities.into_iter().enumerate() {
        let row = i + 1;
        let id = match e.id {
            Some(0) => {
                return Err(IngestError::InvalidId {
                    row,
                    value: "0".into(),
                })
            }
            Some(id) => id,
            None => row as u64,
        };
        let mut values = Vec::with_capacity(e.values.len());
        for (a, v) in e.values.into_iter().enumerate() {
            match v {
                Some(v) if v.is_finite() => values.push(v),
                None if opts.impute_missing && a < schema.len() => {
                    missing.push((i, a));
                    values.push(f64::NAN);
                }
                _ => {
                    let column = schema
                        .attributes()
                        .get(a)
                        .map_or_else(|| format!("#{a}"), |d| d.code.clone());
                    return Err(IngestError::NonNumericCell {
                        row,
                        column,
                        value: v.map_or_else(|| "null".into(), |v| v.to_string()),
                    });
                }
            }
        }
        entities.push(EntityRecord {
            id,
            name: e.name,
            parent: e.parent,
            values,
        });
    }
    let diagnostics = impute(&schema, &mut entities, &missing)?;
    Ok((Dataset::new(schema, entities)?, diagnostics))
}

/// Writes the CSV encoding. Values use the shortest representation that
/// parses back to the identical `f64`.
pub fn write_csv<W: Write>(d: &Dataset, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["id".to_string(), "name".into(), "parent".into()];
    header.extend(d.schema.codes());
    w.write_record(&header)?;
    for e in &d.entities {
        let mut row = vec![e.id.to_string(), e.name.clone(), e.parent.clone()];
        row.extend(e.values.iter().map(|v| v.to_string()));
        w.write_record(&row)?;
    }
    w.flush().map_err(|source| IngestError::Io {
        path: "<csv writer>".into(),
        source,
    })?;
    Ok(())
}

pub fn write_json<W: Write>(d: &Dataset, writer: W) -> Result<()> {
    serde_json::to_writer_pretty(writer, d)?;
    Ok(())
}

/// Checks every type invariant and reports violations without failing.
pub fn validate_dataset(d: &Dataset) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for a in d.schema.attributes() {
        if a.code.trim().is_empty() {
            out.push(Diagnostic::new(Rule::EmptyCode, ""));
        } else if !seen.insert(a.code.as_str()) {
            out.push(Diagnostic::new(Rule::DuplicateCode, "").attribute(a.code.clone()));
        }
    }
    if d.entities.len() < 2 {
        out.push(Diagnostic::new(
            Rule::TooFewEntities,
            format!("{} entities", d.entities.len()),
        ));
    }
    let mut ids = HashSet::new();
    for e in &d.entities {
        if e.id == 0 {
            out.push(Diagnostic::new(Rule::InvalidId, "").entity(0));
        }
        if !ids.insert(e.id) {
            out.push(Diagnostic::new(Rule::DuplicateId, "").entity(e.id));
        }
        if e.values.len() != d.schema.len() {
            out.push(
                Diagnostic::new(
                    Rule::LengthMismatch,
                    format!("{} values, {} attributes", e.values.len(), d.schema.len()),
                )
                .entity(e.id),
            );
        }
        for (a, &v) in d.schema.attributes().iter().zip(&e.values) {
            if !v.is_finite() {
                out.push(
                    Diagnostic::new(Rule::NonFinite, v.to_string())
                        .entity(e.id)
                        .attribute(a.code.clone()),
                );
            } else if a.units == Units::Percentage && !(0.0..=100.0).contains(&v) {
                out.push(
                    Diagnostic::new(Rule::PercentageOutOfRange, v.to_string())
                        .entity(e.id)
                        .attribute(a.code.clone()),
                );
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_attr_schema() -> AttributeSchema {
        AttributeSchema::new(vec![
            AttributeDef::new("a", "A", Units::Percentage, Direction::FavourableHigh),
            AttributeDef::new("b", "B", Units::Rate, Direction::FavourableLow),
        ])
        .unwrap()
    }

    fn opts(schema: AttributeSchema) -> ParseOptions {
        ParseOptions {
            schema: Some(schema),
            ..Default::default()
        }
    }

    #[test]
    fn default_schema_shape() {
        let s = AttributeSchema::wash_default();
        assert_eq!(s.len(), 15);
        let codes: Vec<String> = (1..=15).map(|i| format!("x{i}")).collect();
        assert_eq!(s.codes(), codes);
        let low: Vec<&str> = s
            .attributes()
            .iter()
            .filter(|a| a.direction == Direction::FavourableLow)
            .map(|a| a.code.as_str())
            .collect();
        assert_eq!(low, ["x3", "x4", "x5", "x8"]);
    }

    #[test]
    fn schema_rejects_duplicates_and_empty_codes() {
        let d = AttributeDef::new("a", "", Units::Rate, Direction::FavourableHigh);
        assert!(AttributeSchema::new(vec![d.clone(), d.clone()]).is_err());
        let e = AttributeDef::new(" ", "", Units::Rate, Direction::FavourableHigh);
        assert!(AttributeSchema::new(vec![e]).is_err());
        assert!(AttributeSchema::new(vec![]).is_err());
    }

    #[test]
    fn two_zero_rows() {
        let csv = "a,b\n0,0\n0,0\n";
        let (d, diags) = read_csv(csv.as_bytes(), &opts(two_attr_schema())).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.ids(), [1, 2]);
        assert!(d.entities.iter().all(|e| e.values == [0.0, 0.0]));
        assert!(diags.is_empty());
    }

    #[test]
    fn missing_column_is_named() {
        let csv = "x1,x2,x3,x4,x5,x6,x7,x8,x10,x11,x12,x13,x14,x15\n";
        let err = read_csv(csv.as_bytes(), &ParseOptions::default()).unwrap_err();
        assert!(
            matches!(err, IngestError::MissingColumn(ref c) if c == "x9"),
            "{err}"
        );
    }

    #[test]
    fn non_numeric_cell_reports_row_and_column() {
        let csv = "a,b\n1,2\n3,oops\n";
        let err = read_csv(csv.as_bytes(), &opts(two_attr_schema())).unwrap_err();
        match err {
            IngestError::NonNumericCell { row, column, value } => {
                assert_eq!((row, column.as_str(), value.as_str()), (2, "b", "oops"));
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn nan_cells_are_rejected_at_parse_time() {
        let csv = "a,b\n1,NaN\n3,4\n";
        assert!(matches!(
            read_csv(csv.as_bytes(), &opts(two_attr_schema())),
            Err(IngestError::NonNumericCell { .. })
        ));
    }

    #[test]
    fn duplicate_ids_and_too_few_rows() {
        let csv = "id,a,b\n4,1,2\n4,3,4\n";
        assert!(matches!(
            read_csv(csv.as_bytes(), &opts(two_attr_schema())),
            Err(IngestError::DuplicateId(4))
        ));
        let csv = "a,b\n1,2\n";
        assert!(matches!(
            read_csv(csv.as_bytes(), &opts(two_attr_schema())),
            Err(IngestError::TooFewRows(1))
        ));
    }

    #[test]
    fn explicit_ids_names_and_row_order() {
        let csv = "name,id,b,a,parent\nMoran,170,1,2,Lara\nBaruta,200,3,4,Miranda\n";
        let (d, _) = read_csv(csv.as_bytes(), &opts(two_attr_schema())).unwrap();
        assert_eq!(d.ids(), [170, 200]);
        assert_eq!(d.entities[0].name, "Moran");
        assert_eq!(d.entities[1].parent, "Miranda");
        assert_eq!(d.entities[0].values, [2.0, 1.0]);
    }

    #[test]
    fn missing_cells_fail_unless_imputing() {
        let csv = "a,b\n1,\n3,4\n5,8\n";
        assert!(matches!(
            read_csv(csv.as_bytes(), &opts(two_attr_schema())),
            Err(IngestError::NonNumericCell { row: 1, .. })
        ));
        let o = ParseOptions {
            impute_missing: true,
            ..opts(two_attr_schema())
        };
        let (d, diags) = read_csv(csv.as_bytes(), &o).unwrap();
        assert_eq!(d.entities[0].values, [1.0, 6.0]);
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].rule, Rule::ImputedValue);
        assert_eq!(diags[0].entity_id, Some(1));
    }

    #[test]
    fn decimal_comma_locale() {
        let csv = "a;b\n77,77%;24,85\n91,24 %;10,64\n";
        let o = ParseOptions {
            decimal_comma: true,
            ..opts(two_attr_schema())
        };
        let (d, _) = read_csv(csv.as_bytes(), &o).unwrap();
        assert_eq!(d.entities[0].values, [77.77, 24.85]);
        assert_eq!(d.entities[1].values, [91.24, 10.64]);
        // Without the flag the same cell is rejected.
        let csv = "a,b\n\"77,77\",1\n1,1\n";
        assert!(read_csv(csv.as_bytes(), &opts(two_attr_schema())).is_err());
    }

    #[test]
    fn validate_flags_out_of_range_and_nan() {
        let schema = two_attr_schema();
        let mk = |id, a, b| EntityRecord {
            id,
            name: String::new(),
            parent: String::new(),
            values: vec![a, b],
        };
        let d = Dataset::new(schema.clone(), vec![mk(1, 105.0, 1.0), mk(2, 50.0, 2.0)]).unwrap();
        let diags = validate_dataset(&d);
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].rule.as_str(), "percentage out of range");
        assert_eq!(diags[0].entity_id, Some(1));
        assert_eq!(diags[0].attribute.as_deref(), Some("a"));

        let d = Dataset::new(schema, vec![mk(1, 10.0, f64::NAN), mk(2, 50.0, 2.0)]).unwrap();
        let diags = validate_dataset(&d);
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].rule.as_str(), "non-finite value");

        // rates are not range-checked
        let d = Dataset::new(
            two_attr_schema(),
            vec![mk(1, 10.0, 400.0), mk(2, 0.0, -1.0)],
        )
        .unwrap();
        assert!(validate_dataset(&d).is_empty());
    }

    #[test]
    fn json_round_trip() {
        let csv = "id,name,a,b\n3,p,0.1,1e-300\n9,q,99.99999999999999,-0\n";
        let (d, _) = read_csv(csv.as_bytes(), &opts(two_attr_schema())).unwrap();
        let mut buf = Vec::new();
        write_json(&d, &mut buf).unwrap();
        let (back, _) = read_json(buf.as_slice(), &ParseOptions::default()).unwrap();
        assert_eq!(back, d);
    }
}
