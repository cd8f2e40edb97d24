use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::cut::Cut;
use super::TaxonomyError;

/// The seven subcategories shipped as the default label set.
pub const DEFAULT_LABELS: [&str; 7] = ["Ia", "Ib", "IIa", "IIb", "IIIa", "IIIb", "IIIc"];

/// What a specialist moves: one entity, or every member of a base-cut group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Entity(u64),
    Group(u32),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OverrideEntry {
    pub target: Target,
    /// Label the target held before the move; `"mixed"` for a group whose
    /// members disagreed. Filled in by [`TaxonomyState::apply_override`].
    #[serde(default)]
    pub from_label: String,
    pub to_label: String,
    #[serde(default)]
    pub author: String,
    #[serde(default)]
    pub rationale: String,
    /// RFC 3339, supplied by the caller.
    #[serde(default)]
    pub timestamp: String,
}

/// Base cut, group-to-label map and the append-only override ledger.
///
/// `effective_assignment` always equals the map applied to the cut followed
/// by every ledger entry in order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaxonomyState {
    pub entity_ids: Vec<u64>,
    pub base_cut: Cut,
    pub labels: Vec<String>,
    pub category_map: BTreeMap<u32, String>,
    pub overrides: Vec<OverrideEntry>,
    pub effective_assignment: Vec<String>,
}

/// Labels each group with its own number, `"1"` .. `"k"`.
pub fn identity_mapping(cut: &Cut) -> BTreeMap<u32, String> {
    cut.group_ids().map(|g| (g, g.to_string())).collect()
}

pub fn assign_taxonomy(
    cut: &Cut,
    mapping: &BTreeMap<u32, String>,
    entity_ids: &[u64],
) -> Result<TaxonomyState, TaxonomyError> {
    TaxonomyState::new(entity_ids.to_vec(), cut.clone(), mapping.clone())
}

impl TaxonomyState {
    /// Declared labels are the seven defaults followed by any other label the
    /// mapping uses, in group order.
    pub fn new(
        entity_ids: Vec<u64>,
        base_cut: Cut,
        category_map: BTreeMap<u32, String>,
    ) -> Result<Self, TaxonomyError> {
        let mut labels: Vec<String> = DEFAULT_LABELS.iter().map(|s| s.to_string()).collect();
        for l in category_map.values() {
            if !labels.contains(l) {
                labels.push(l.clone());
            }
        }
        Self::with_labels(entity_ids, base_cut, category_map, labels)
    }

    pub fn with_labels(
        entity_ids: Vec<u64>,
        base_cut: Cut,
        category_map: BTreeMap<u32, String>,
        labels: Vec<String>,
    ) -> Result<Self, TaxonomyError> {
        if entity_ids.len() != base_cut.n() {
            return Err(TaxonomyError::SizeMismatch {
                entities: entity_ids.len(),
                cut: base_cut.n(),
            });
        }
        for g in base_cut.group_ids() {
            if !category_map.contains_key(&g) {
                return Err(TaxonomyError::UnmappedGroup(g));
            }
        }
        for (&g, l) in &category_map {
            if g == 0 || g as usize > base_cut.group_count() {
                return Err(TaxonomyError::UnknownGroup(g));
            }
            if !labels.contains(l) {
                return Err(TaxonomyError::UnknownLabel(l.clone()));
            }
        }
        let effective_assignment = base_cut
            .assignment
            .iter()
            .map(|g| category_map[g].clone())
            .collect();
        Ok(TaxonomyState {
            entity_ids,
            base_cut,
            labels,
            category_map,
            overrides: Vec::new(),
            effective_assignment,
        })
    }

    pub fn n(&self) -> usize {
        self.entity_ids.len()
    }

    pub fn position_of(&self, id: u64) -> Option<usize> {
        self.entity_ids.iter().position(|&e| e == id)
    }

    pub fn label_of(&self, id: u64) -> Option<&str> {
        self.position_of(id)
            .map(|p| self.effective_assignment[p].as_str())
    }

    /// Entity positions carrying `label`.
    pub fn members_of(&self, label: &str) -> Vec<usize> {
        self.effective_assignment
            .iter()
            .enumerate()
            .filter(|(_, l)| *l == label)
            .map(|(i, _)| i)
            .collect()
    }

    fn positions(&self, target: Target) -> Result<Vec<usize>, TaxonomyError> {
        match target {
            Target::Entity(id) => self
                .position_of(id)
                .map(|p| vec![p])
                .ok_or(TaxonomyError::UnknownEntity(id)),
            Target::Group(g) => {
                let m = self.base_cut.members(g);
                if m.is_empty() {
                    Err(TaxonomyError::UnknownGroup(g))
                } else {
                    Ok(m)
                }
            }
        }
    }

    /// Returns a new state with `entry` appended to the ledger.
    pub fn apply_override(&self, mut entry: OverrideEntry) -> Result<TaxonomyState, TaxonomyError> {
        let positions = self.positions(entry.target)?;
        if !self.labels.contains(&entry.to_label) {
            return Err(TaxonomyError::UnknownLabel(entry.to_label));
        }
        let first = &self.effective_assignment[positions[0]];
        entry.from_label = if positions
            .iter()
            .all(|&p| &self.effective_assignment[p] == first)
        {
            first.clone()
        } else {
            "mixed".to_string()
        };
        let mut next = self.clone();
        for p in positions {
            next.effective_assignment[p] = entry.to_label.clone();
        }
        next.overrides.push(entry);
        Ok(next)
    }

    /// Rebuilds the state from the base cut and the first `prefix` ledger entries.
    pub fn replay(&self, prefix: usize) -> Result<TaxonomyState, TaxonomyError> {
        let mut s = TaxonomyState::with_labels(
            self.entity_ids.clone(),
            self.base_cut.clone(),
            self.category_map.clone(),
            self.labels.clone(),
        )?;
        for e in self.overrides.iter().take(prefix) {
            s = s.apply_override(e.clone())?;
        }
        Ok(s)
    }

    /// Checks that replaying the full ledger reproduces the stored assignment.
    pub fn verify(&self) -> Result<(), TaxonomyError> {
        let replayed = self.replay(self.overrides.len())?;
        if replayed.effective_assignment != self.effective_assignment {
            return Err(TaxonomyError::ReplayMismatch);
        }
        Ok(())
    }

    /// Parses and verifies a serialized state.
    pub fn from_json(s: &str) -> Result<TaxonomyState, TaxonomyError> {
        let state: TaxonomyState =
            serde_json::from_str(s).map_err(|e| TaxonomyError::Malformed(e.to_string()))?;
        state.verify()?;
        Ok(state)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("taxonomy state serializes")
    }
}
