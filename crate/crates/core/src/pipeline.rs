//! Batch run: read a dataset, analyse it and write the artifact set.
//!
//! Artifacts are pure functions of the input bytes and the configuration,
//! so a rerun produces byte-identical files. Every artifact carries a
//! provenance record: tool version, input digest and the configuration
//! (without the output directory).

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::analysis::{Analysis, AnalysisError, AnalysisOptions, ClusterInput};
use crate::cluster::{LinkageKind, Strategy};
use crate::diagnostics::Diagnostic;
use crate::ingest::{
    read_csv, read_json, validate_dataset, AttributeSchema, Dataset, Format, ParseOptions,
};
use crate::report::{boxplot_stats_with_ids, Scale};
use crate::svg;
use crate::taxonomy::{CutRequest, TaxonomyError};

pub const TOOL: &str = "municlust";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("computation error: {0}")]
    Compute(String),
}

impl PipelineError {
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) => 1,
            PipelineError::Data(_) => 2,
            PipelineError::Compute(_) => 3,
        }
    }
}

impl From<AnalysisError> for PipelineError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::Taxonomy(
                t @ (TaxonomyError::InvalidK { .. }
                | TaxonomyError::NegativeThreshold(_)
                | TaxonomyError::UnmappedGroup(_)
                | TaxonomyError::UnknownGroup(_)
                | TaxonomyError::UnknownLabel(_)
                | TaxonomyError::WeightsNotNormalized(_)),
            ) => PipelineError::Config(t.to_string()),
            other => PipelineError::Compute(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub input: PathBuf,
    /// Guessed from the extension when absent.
    pub format: Option<Format>,
    /// JSON array of attribute definitions; the built-in fifteen when absent.
    pub schema: Option<PathBuf>,
    pub linkage: LinkageKind,
    pub strategy: Strategy,
    pub cluster_on: ClusterInput,
    pub cut: CutRequest,
    pub weights: Option<Vec<f64>>,
    /// JSON object from group id to label.
    pub mapping: Option<PathBuf>,
    /// CSV with `id,population` columns.
    pub populations: Option<PathBuf>,
    pub means_scale: Scale,
    pub decimal_comma: bool,
    pub impute_missing: bool,
    /// Also write `radial.svg` and `boxplot.svg`.
    pub extra_charts: bool,
    /// Entities marked on the NL2 scatter.
    pub highlight: Vec<u64>,
    #[serde(skip)]
    pub output_dir: PathBuf,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let a = AnalysisOptions::default();
        PipelineConfig {
            input: PathBuf::new(),
            format: None,
            schema: None,
            linkage: a.linkage,
            strategy: a.strategy,
            cluster_on: a.cluster_on,
            cut: a.cut,
            weights: None,
            mapping: None,
            populations: None,
            means_scale: a.means_scale,
            decimal_comma: false,
            impute_missing: false,
            extra_charts: false,
            highlight: Vec::new(),
            output_dir: PathBuf::from("out"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub input_sha256: String,
    pub config: PipelineConfig,
}

impl Provenance {
    pub fn new(input: &[u8], config: &PipelineConfig) -> Provenance {
        Provenance {
            tool: TOOL.to_string(),
            version: VERSION.to_string(),
            input_sha256: sha256_hex(input),
            config: config.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("provenance serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtifactRecord {
    pub name: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub provenance: Provenance,
    pub artifacts: Vec<ArtifactRecord>,
    pub diagnostics: Vec<Diagnostic>,
}

#[derive(Debug)]
pub struct RunSummary {
    pub artifacts: Vec<PathBuf>,
    pub diagnostics: Vec<Diagnostic>,
    pub group_count: usize,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn read_file(path: &Path, what: &str) -> Result<Vec<u8>, PipelineError> {
    fs::read(path)
        .map_err(|e| PipelineError::Config(format!("cannot read {what} {}: {e}", path.display())))
}

/// Loaded and checked inputs, before any computation.
pub struct Inputs {
    pub bytes: Vec<u8>,
    pub parse: ParseOptions,
    pub format: Format,
    pub mapping: Option<BTreeMap<u32, String>>,
    pub populations: Option<BTreeMap<u64, f64>>,
}

impl PipelineConfig {
    pub fn analysis_options(&self, mapping: Option<BTreeMap<u32, String>>) -> AnalysisOptions {
        AnalysisOptions {
            linkage: self.linkage,
            strategy: self.strategy,
            cluster_on: self.cluster_on,
            cut: self.cut,
            weights: self.weights.clone(),
            mapping,
            means_scale: self.means_scale,
        }
    }

    /// Reads every referenced file and checks what can be checked without data.
    pub fn load_inputs(&self) -> Result<Inputs, PipelineError> {
        if self.strategy == Strategy::NnChain && !self.linkage.is_reducible() {
            return Err(PipelineError::Config(format!(
                "strategy nn-chain requires a reducible linkage, got {}",
                self.linkage
            )));
        }
        match self.cut {
            CutRequest::ByCount(0) => {
                return Err(PipelineError::Config("cut count must be at least 1".into()))
            }
            CutRequest::ByHeight(h) if h.is_nan() || h < 0.0 => {
                return Err(PipelineError::Config(format!(
                    "cut height {h} must be non-negative"
                )))
            }
            _ => {}
        }
        let bytes = read_file(&self.input, "input file")?;
        let schema =
            match &self.schema {
                Some(p) => {
                    let s = read_file(p, "schema file")?;
                    Some(serde_json::from_slice::<AttributeSchema>(&s).map_err(|e| {
                        PipelineError::Config(format!("schema {}: {e}", p.display()))
                    })?)
                }
                None => None,
            };
        let mapping = match &self.mapping {
            Some(p) => {
                let s = read_file(p, "mapping file")?;
                Some(
                    serde_json::from_slice::<BTreeMap<u32, String>>(&s).map_err(|e| {
                        PipelineError::Config(format!("mapping {}: {e}", p.display()))
                    })?,
                )
            }
            None => None,
        };
        let populations = match &self.populations {
            Some(p) => Some(
                read_populations(&read_file(p, "populations file")?).map_err(|e| {
                    PipelineError::Config(format!("populations {}: {e}", p.display()))
                })?,
            ),
            None => None,
        };
        Ok(Inputs {
            bytes,
            parse: ParseOptions {
                schema,
                decimal_comma: self.decimal_comma,
                impute_missing: self.impute_missing,
            },
            format: self
                .format
                .unwrap_or_else(|| Format::from_path(&self.input)),
            mapping,
            populations,
        })
    }
}

fn read_populations(bytes: &[u8]) -> Result<BTreeMap<u64, f64>, String> {
    #[derive(Deserialize)]
    struct Row {
        id: u64,
        population: f64,
    }
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let mut out = BTreeMap::new();
    for row in rdr.deserialize::<Row>() {
        let r = row.map_err(|e| e.to_string())?;
        if !(r.population.is_finite() && r.population >= 0.0) {
            return Err(format!(
                "population of {} must be a non-negative number",
                r.id
            ));
        }
        out.insert(r.id, r.population);
    }
    Ok(out)
}

/// Parses the input and runs structural validation.
pub fn load_dataset(inputs: &Inputs) -> Result<(Dataset, Vec<Diagnostic>), PipelineError> {
    let (d, mut diags) = match inputs.format {
        Format::Csv => read_csv(inputs.bytes.as_slice(), &inputs.parse),
        Format::Json => read_json(inputs.bytes.as_slice(), &inputs.parse),
    }
    .map_err(|e| PipelineError::Data(e.to_string()))?;
    diags.extend(validate_dataset(&d));
    if let Some(bad) = diags.iter().find(|x| x.rule.is_structural()) {
        return Err(PipelineError::Data(bad.to_string()));
    }
    Ok((d, diags))
}

fn csv_text(
    provenance: &Provenance,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    let body = String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8");
    format!("# provenance: {}\n{body}", provenance.to_json())
}

/// Renders every artifact as `(file name, contents)`, in manifest order.
pub fn render_artifacts(
    a: &Analysis,
    provenance: &Provenance,
    scale: Scale,
    populations: Option<&[f64]>,
    extra_charts: bool,
    highlight: &[u64],
) -> Result<Vec<(String, String)>, PipelineError> {
    let ids = a.dataset.ids();
    let ts = &a.taxonomy;
    let nl2 = &a.indicator.values;
    let prov = provenance.to_json();

    let assignments = csv_text(
        provenance,
        &["id", "name", "group", "label", "nl2"],
        a.dataset.entities.iter().enumerate().map(|(i, e)| {
            vec![
                e.id.to_string(),
                e.name.clone(),
                ts.base_cut.assignment[i].to_string(),
                ts.effective_assignment[i].clone(),
                nl2[i].to_string(),
            ]
        }),
    );
    let mut order: Vec<usize> = (0..ids.len()).collect();
    order.sort_by(|&x, &y| nl2[y].total_cmp(&nl2[x]).then(ids[x].cmp(&ids[y])));
    let nl2_csv = csv_text(
        provenance,
        &["rank", "id", "label", "nl2"],
        order.iter().enumerate().map(|(r, &i)| {
            vec![
                (r + 1).to_string(),
                ids[i].to_string(),
                ts.effective_assignment[i].clone(),
                nl2[i].to_string(),
            ]
        }),
    );

    let stats = a.stats(scale, populations)?;
    #[derive(Serialize)]
    struct StatsFile<'a> {
        provenance: &'a Provenance,
        #[serde(flatten)]
        stats: &'a crate::analysis::Stats,
        diagnostics: &'a [Diagnostic],
        tree: &'a crate::cluster::MergeTree,
    }
    let stats_json = serde_json::to_string_pretty(&StatsFile {
        provenance,
        stats: &stats,
        diagnostics: &a.diagnostics,
        tree: &a.tree,
    })
    .map_err(|e| PipelineError::Compute(e.to_string()))?
        + "\n";

    let leaf_labels: Vec<String> = a
        .dataset
        .entities
        .iter()
        .map(|e| e.id.to_string())
        .collect();
    let cut_height = match ts.base_cut.request {
        CutRequest::ByHeight(h) => Some(h),
        CutRequest::ByCount(_) => None,
    };
    let compute = |e: crate::report::ReportError| PipelineError::Compute(e.to_string());
    let dendrogram =
        svg::render_dendrogram(&a.tree, &leaf_labels, cut_height, &prov).map_err(compute)?;
    let legend = a.labels_in_use();
    let scatter = svg::render_nl2_scatter(
        &ids,
        nl2,
        &ts.effective_assignment,
        &legend,
        highlight,
        &prov,
    )
    .map_err(compute)?;

    let mut out = vec![
        ("assignments.csv".to_string(), assignments),
        ("nl2.csv".to_string(), nl2_csv),
        ("stats.json".to_string(), stats_json),
        ("dendrogram.svg".to_string(), dendrogram),
        ("nl2_scatter.svg".to_string(), scatter),
    ];
    if extra_charts {
        if stats.radial.codes.len() >= 3 {
            out.push((
                "radial.svg".to_string(),
                svg::render_radial(&stats.radial, &prov).map_err(compute)?,
            ));
        }
        let series: Vec<(String, _)> = legend
            .iter()
            .map(|l| {
                let pairs: Vec<(u64, f64)> =
                    ts.members_of(l).iter().map(|&p| (ids[p], nl2[p])).collect();
                boxplot_stats_with_ids(&pairs).map(|b| (l.clone(), b))
            })
            .collect::<Result<_, _>>()
            .map_err(compute)?;
        out.push((
            "boxplot.svg".to_string(),
            svg::render_boxplot("NL2 by label", &series, &prov).map_err(compute)?,
        ));
    }
    Ok(out)
}

pub fn manifest_json(
    provenance: &Provenance,
    artifacts: &[(String, String)],
    diagnostics: &[Diagnostic],
) -> String {
    let m = Manifest {
        provenance: provenance.clone(),
        artifacts: artifacts
            .iter()
            .map(|(name, body)| ArtifactRecord {
                name: name.clone(),
                bytes: body.len(),
                sha256: sha256_hex(body.as_bytes()),
            })
            .collect(),
        diagnostics: diagnostics.to_vec(),
    };
    serde_json::to_string_pretty(&m).expect("manifest serializes") + "\n"
}

pub fn run_pipeline(cfg: &PipelineConfig) -> Result<RunSummary, PipelineError> {
    let inputs = cfg.load_inputs()?;
    let (dataset, mut diagnostics) = load_dataset(&inputs)?;
    let populations = match &inputs.populations {
        Some(map) => Some(
            dataset
                .ids()
                .iter()
                .map(|id| {
                    map.get(id).copied().ok_or_else(|| {
                        PipelineError::Data(format!("no population for entity {id}"))
                    })
                })
                .collect::<Result<Vec<f64>, _>>()?,
        ),
        None => None,
    };
    let provenance = Provenance::new(&inputs.bytes, cfg);
    let analysis = Analysis::build(dataset, &cfg.analysis_options(inputs.mapping.clone()))?;
    diagnostics.extend(analysis.diagnostics.iter().cloned());

    let mut artifacts = render_artifacts(
        &analysis,
        &provenance,
        cfg.means_scale,
        populations.as_deref(),
        cfg.extra_charts,
        &cfg.highlight,
    )?;
    let manifest = manifest_json(&provenance, &artifacts, &diagnostics);
    artifacts.push(("manifest.json".to_string(), manifest));

    fs::create_dir_all(&cfg.output_dir).map_err(|e| {
        PipelineError::Config(format!("cannot create {}: {e}", cfg.output_dir.display()))
    })?;
    let mut written = Vec::with_capacity(artifacts.len());
    for (name, body) in &artifacts {
        let path = cfg.output_dir.join(name);
        fs::write(&path, body)
            .map_err(|e| PipelineError::Config(format!("cannot write {}: {e}", path.display())))?;
        written.push(path);
    }
    Ok(RunSummary {
        artifacts: written,
        diagnostics,
        group_count: analysis.taxonomy.base_cut.group_count(),
    })
}
