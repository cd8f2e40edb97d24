//! The full in-memory computation: normalize, cluster, cut, label, score and
//! summarize one dataset. Shared by the batch pipeline and HTTP sessions.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cluster::{
    agglomerate_with, pairwise_distances, ClusterError, LinkageKind, MergeTree, Strategy,
};
use crate::diagnostics::Diagnostic;
use crate::ingest::Dataset;
use crate::normalize::{
    apply_direction_complement, minmax_normalize, NormalizeError, NormalizedMatrix,
};
use crate::report::{
    category_boxplots, category_means, radial_profile, CategoryMeans, LabelBoxplots, RadialProfile,
    ReportError, Scale,
};
use crate::taxonomy::{
    cut_tree, identity_mapping, nl2, partition_report, Cut, CutRequest, IndicatorConfig,
    IndicatorResult, LabelSummary, PartitionReport, TaxonomyError, TaxonomyState,
};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Normalize(#[from] NormalizeError),
    #[error(transparent)]
    Cluster(#[from] ClusterError),
    #[error(transparent)]
    Taxonomy(#[from] TaxonomyError),
    #[error(transparent)]
    Report(#[from] ReportError),
}

/// Which matrix the distances are computed on. The direction complement does
/// not change distances, so normalized and complemented input agree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClusterInput {
    #[default]
    Normalized,
    Raw,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalysisOptions {
    pub linkage: LinkageKind,
    pub strategy: Strategy,
    pub cluster_on: ClusterInput,
    pub cut: CutRequest,
    /// Defaults to [`IndicatorConfig::default_for`] the dataset schema.
    pub weights: Option<Vec<f64>>,
    /// Group id to label. Defaults to each group's own number.
    pub mapping: Option<BTreeMap<u32, String>>,
    pub means_scale: Scale,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            linkage: LinkageKind::Ward,
            strategy: Strategy::Auto,
            cluster_on: ClusterInput::Normalized,
            cut: CutRequest::ByCount(7),
            weights: None,
            mapping: None,
            means_scale: Scale::Raw,
        }
    }
}

/// Everything derived from one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Analysis {
    pub dataset: Dataset,
    /// Normalized and direction-complemented.
    pub normalized: NormalizedMatrix,
    pub tree: MergeTree,
    pub taxonomy: TaxonomyState,
    pub indicator_config: IndicatorConfig,
    pub indicator: IndicatorResult,
    pub diagnostics: Vec<Diagnostic>,
}

/// Summary statistics written to `stats.json` and served by the HTTP API.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub linkage: LinkageKind,
    pub cut: CutRequest,
    pub group_count: usize,
    pub weights: Vec<f64>,
    pub means: CategoryMeans,
    pub boxplot_rule: String,
    pub boxplots: Vec<LabelBoxplots>,
    pub radial: RadialProfile,
    pub nl2: Vec<LabelSummary>,
    pub partition: PartitionReport,
}

pub const BOXPLOT_RULE: &str =
    "quartiles: medians of lower and upper halves, median included in both halves for odd counts; whiskers: most extreme values within 1.5 IQR; points beyond are outliers";

pub fn resolve_weights(
    d: &Dataset,
    weights: Option<&[f64]>,
) -> Result<IndicatorConfig, TaxonomyError> {
    let cfg = match weights {
        Some(w) => IndicatorConfig::new(w.to_vec())?,
        None => IndicatorConfig::default_for(&d.schema)?,
    };
    if cfg.weights().len() != d.schema.len() {
        return Err(TaxonomyError::WeightsNotNormalized(format!(
            "{} weights for {} attributes",
            cfg.weights().len(),
            d.schema.len()
        )));
    }
    Ok(cfg)
}

/// Labels a cut with `mapping`, or with group numbers when absent.
pub fn label_cut(
    d: &Dataset,
    cut: &Cut,
    mapping: Option<&BTreeMap<u32, String>>,
) -> Result<TaxonomyState, TaxonomyError> {
    let mapping = match mapping {
        Some(m) => m.clone(),
        None => identity_mapping(cut),
    };
    TaxonomyState::new(d.ids(), cut.clone(), mapping)
}

impl Analysis {
    pub fn build(dataset: Dataset, opts: &AnalysisOptions) -> Result<Analysis, AnalysisError> {
        let indicator_config = resolve_weights(&dataset, opts.weights.as_deref())?;
        let plain = minmax_normalize(&dataset)?;
        let mut diagnostics = plain.diagnostics();
        let normalized = apply_direction_complement(&plain, &dataset.schema)?;
        let input = match opts.cluster_on {
            ClusterInput::Normalized => plain.z,
            ClusterInput::Raw => dataset.raw_matrix(),
        };
        let dm = pairwise_distances(&input)?;
        let tree = agglomerate_with(&dm, opts.linkage, opts.strategy)?;
        let cut = cut_tree(&tree, opts.cut)?;
        let taxonomy = label_cut(&dataset, &cut, opts.mapping.as_ref())?;
        let indicator = nl2(&normalized, &indicator_config)?;
        diagnostics.sort_by(|a, b| a.attribute.cmp(&b.attribute));
        Ok(Analysis {
            dataset,
            normalized,
            tree,
            taxonomy,
            indicator_config,
            indicator,
            diagnostics,
        })
    }

    /// Re-cuts the tree. The override ledger starts empty.
    pub fn recut(
        &mut self,
        request: CutRequest,
        mapping: Option<&BTreeMap<u32, String>>,
    ) -> Result<(), AnalysisError> {
        let cut = cut_tree(&self.tree, request)?;
        self.taxonomy = label_cut(&self.dataset, &cut, mapping)?;
        Ok(())
    }

    pub fn set_weights(&mut self, weights: &[f64]) -> Result<(), AnalysisError> {
        self.indicator_config = resolve_weights(&self.dataset, Some(weights))?;
        self.indicator = nl2(&self.normalized, &self.indicator_config)?;
        Ok(())
    }

    pub fn stats(&self, scale: Scale, populations: Option<&[f64]>) -> Result<Stats, AnalysisError> {
        let codes = self.dataset.schema.codes();
        let x = match scale {
            Scale::Raw => self.dataset.raw_matrix(),
            Scale::Normalized => self.normalized.z.clone(),
        };
        let means = category_means(&x, &codes, &self.taxonomy, scale)?;
        let radial = radial_profile(&means);
        Ok(Stats {
            linkage: self.tree.linkage,
            cut: self.taxonomy.base_cut.request,
            group_count: self.taxonomy.base_cut.group_count(),
            weights: self.indicator_config.weights().to_vec(),
            boxplot_rule: BOXPLOT_RULE.to_string(),
            boxplots: category_boxplots(&x, &codes, &self.taxonomy)?,
            means,
            radial,
            nl2: self.indicator.summarize(&self.taxonomy),
            partition: partition_report(&self.taxonomy, populations),
        })
    }

    /// Labels in use, in declared order.
    pub fn labels_in_use(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .taxonomy
            .labels
            .iter()
            .filter(|l| self.taxonomy.effective_assignment.contains(l))
            .cloned()
            .collect();
        for l in &self.taxonomy.effective_assignment {
            if !out.contains(l) {
                out.push(l.clone());
            }
        }
        out
    }
}
