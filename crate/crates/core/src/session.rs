//! Persistent analysis sessions for the HTTP service.
//!
//! Each session is one JSON file in the store directory. Mutations are
//! serialized per session and guarded by a version number: a request that
//! names a stale base version is rejected instead of overwriting.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use parking_lot::Mutex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{Analysis, AnalysisError, AnalysisOptions};
use crate::ingest::{read_csv, read_json, validate_dataset, Format, ParseOptions};
use crate::pipeline::sha256_hex;
use crate::taxonomy::{CutRequest, OverrideEntry, TaxonomyError};

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("unknown session {0}")]
    UnknownSession(String),
    #[error("not found: {0}")]
    NotFound(String),
    #[error("stale version: request based on {base}, session is at {current}")]
    StaleVersion { base: u64, current: u64 },
    #[error("bad request: {0}")]
    BadRequest(String),
    #[error("storage error: {0}")]
    Storage(String),
}

impl SessionError {
    pub fn status(&self) -> u16 {
        match self {
            SessionError::UnknownSession(_) | SessionError::NotFound(_) => 404,
            SessionError::StaleVersion { .. } => 409,
            SessionError::BadRequest(_) => 400,
            SessionError::Storage(_) => 500,
        }
    }
}

impl From<AnalysisError> for SessionError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::Taxonomy(
                t @ (TaxonomyError::UnknownEntity(_) | TaxonomyError::UnknownGroup(_)),
            ) => SessionError::NotFound(t.to_string()),
            other => SessionError::BadRequest(other.to_string()),
        }
    }
}

impl From<TaxonomyError> for SessionError {
    fn from(e: TaxonomyError) -> Self {
        AnalysisError::Taxonomy(e).into()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub id: String,
    /// Starts at 1 and grows by one per mutation.
    pub version: u64,
    pub created: String,
    pub modified: String,
    pub input_sha256: String,
    pub analysis: Analysis,
}

impl Session {
    /// Checks that the stored assignment is what the ledger replays to.
    pub fn verify(&self) -> Result<(), SessionError> {
        self.analysis
            .taxonomy
            .verify()
            .map_err(|e| SessionError::Storage(format!("session {}: {e}", self.id)))
    }
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

fn valid_id(id: &str) -> bool {
    !id.is_empty() && id.len() <= 64 && id.bytes().all(|b| b.is_ascii_hexdigit())
}

/// Sessions stored as `<dir>/<id>.json`.
pub struct SessionStore {
    dir: PathBuf,
    locks: Mutex<HashMap<String, Arc<Mutex<()>>>>,
}

impl SessionStore {
    pub fn open(dir: impl Into<PathBuf>) -> Result<SessionStore, SessionError> {
        let dir = dir.into();
        fs::create_dir_all(&dir)
            .map_err(|e| SessionError::Storage(format!("{}: {e}", dir.display())))?;
        Ok(SessionStore {
            dir,
            locks: Mutex::new(HashMap::new()),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, id: &str) -> PathBuf {
        self.dir.join(format!("{id}.json"))
    }

    fn lock(&self, id: &str) -> Arc<Mutex<()>> {
        self.locks.lock().entry(id.to_string()).or_default().clone()
    }

    fn save(&self, s: &Session) -> Result<(), SessionError> {
        let body = serde_json::to_vec(s).map_err(|e| SessionError::Storage(e.to_string()))?;
        let tmp = self.dir.join(format!(".{}.tmp", s.id));
        fs::write(&tmp, body)
            .and_then(|_| fs::rename(&tmp, self.path(&s.id)))
            .map_err(|e| SessionError::Storage(format!("saving session {}: {e}", s.id)))
    }

    /// Builds a session from uploaded table bytes.
    pub fn create(
        &self,
        bytes: &[u8],
        format: Format,
        parse: &ParseOptions,
        opts: &AnalysisOptions,
    ) -> Result<Session, SessionError> {
        let (dataset, _) = match format {
            Format::Csv => read_csv(bytes, parse),
            Format::Json => read_json(bytes, parse),
        }
        .map_err(|e| SessionError::BadRequest(e.to_string()))?;
        if let Some(bad) = validate_dataset(&dataset)
            .into_iter()
            .find(|d| d.rule.is_structural())
        {
            return Err(SessionError::BadRequest(bad.to_string()));
        }
        let analysis = Analysis::build(dataset, opts)?;
        let id = format!(
            "{:016x}{:016x}",
            rand::random::<u64>(),
            rand::random::<u64>()
        );
        let t = now();
        let s = Session {
            id,
            version: 1,
            created: t.clone(),
            modified: t,
            input_sha256: sha256_hex(bytes),
            analysis,
        };
        self.save(&s)?;
        Ok(s)
    }

    pub fn get(&self, id: &str) -> Result<Session, SessionError> {
        if !valid_id(id) {
            return Err(SessionError::UnknownSession(id.to_string()));
        }
        let body = match fs::read(self.path(id)) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Err(SessionError::UnknownSession(id.to_string()))
            }
            Err(e) => return Err(SessionError::Storage(e.to_string())),
        };
        serde_json::from_slice(&body)
            .map_err(|e| SessionError::Storage(format!("session {id}: {e}")))
    }

    pub fn list(&self) -> Result<Vec<String>, SessionError> {
        let mut ids: Vec<String> = fs::read_dir(&self.dir)
            .map_err(|e| SessionError::Storage(e.to_string()))?
            .filter_map(|e| e.ok())
            .filter_map(|e| {
                e.file_name()
                    .to_str()?
                    .strip_suffix(".json")
                    .map(str::to_string)
            })
            .filter(|id| valid_id(id))
            .collect();
        ids.sort();
        Ok(ids)
    }

    /// Applies `f` under the session's writer lock. `base` must match the
    /// current version when given.
    pub fn update(
        &self,
        id: &str,
        base: Option<u64>,
        f: impl FnOnce(&mut Analysis) -> Result<(), SessionError>,
    ) -> Result<Session, SessionError> {
        let lock = self.lock(id);
        let _guard = lock.lock();
        let mut s = self.get(id)?;
        if let Some(b) = base {
            if b != s.version {
                return Err(SessionError::StaleVersion {
                    base: b,
                    current: s.version,
                });
            }
        }
        f(&mut s.analysis)?;
        s.version += 1;
        s.modified = now();
        self.save(&s)?;
        Ok(s)
    }

    pub fn cut(
        &self,
        id: &str,
        base: Option<u64>,
        request: CutRequest,
        mapping: Option<&BTreeMap<u32, String>>,
    ) -> Result<Session, SessionError> {
        self.update(id, base, |a| Ok(a.recut(request, mapping)?))
    }

    pub fn add_override(
        &self,
        id: &str,
        base: u64,
        entry: OverrideEntry,
    ) -> Result<Session, SessionError> {
        self.update(id, Some(base), |a| {
            a.taxonomy = a.taxonomy.apply_override(entry)?;
            Ok(())
        })
    }

    pub fn set_weights(
        &self,
        id: &str,
        base: Option<u64>,
        weights: &[f64],
    ) -> Result<Session, SessionError> {
        self.update(id, base, |a| Ok(a.set_weights(weights)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taxonomy::Target;

    const CSV: &str =
        "id,name,a,b,c\n1,one,0,0,0\n2,two,1,0,0\n3,three,10,10,10\n4,four,11,10,10\n";

    fn store() -> (tempfile::TempDir, SessionStore) {
        let dir = tempfile::tempdir().unwrap();
        let store = SessionStore::open(dir.path()).unwrap();
        (dir, store)
    }

    fn parse() -> ParseOptions {
        let schema = crate::ingest::AttributeSchema::new(
            ["a", "b", "c"]
                .iter()
                .map(|c| {
                    crate::ingest::AttributeDef::new(
                        c,
                        c,
                        crate::ingest::Units::Percentage,
                        crate::ingest::Direction::FavourableHigh,
                    )
                })
                .collect(),
        )
        .unwrap();
        ParseOptions {
            schema: Some(schema),
            ..Default::default()
        }
    }

    fn entry(id: u64, to: &str) -> OverrideEntry {
        OverrideEntry {
            target: Target::Entity(id),
            from_label: String::new(),
            to_label: to.into(),
            author: "a".into(),
            rationale: "r".into(),
            timestamp: "t".into(),
        }
    }

    #[test]
    fn create_save_load() {
        let (_d, st) = store();
        let opts = AnalysisOptions {
            cut: CutRequest::ByCount(2),
            ..Default::default()
        };
        let s = st
            .create(CSV.as_bytes(), Format::Csv, &parse(), &opts)
            .unwrap();
        assert_eq!(s.version, 1);
        assert_eq!(st.get(&s.id).unwrap(), s);
        assert_eq!(st.list().unwrap(), std::slice::from_ref(&s.id));
        assert!(matches!(
            st.get("../etc"),
            Err(SessionError::UnknownSession(_))
        ));
    }

    #[test]
    fn stale_override_is_rejected() {
        let (_d, st) = store();
        let opts = AnalysisOptions {
            cut: CutRequest::ByCount(2),
            ..Default::default()
        };
        let s = st
            .create(CSV.as_bytes(), Format::Csv, &parse(), &opts)
            .unwrap();
        let a = st.add_override(&s.id, 1, entry(1, "Ia")).unwrap();
        assert_eq!(a.version, 2);
        let e = st.add_override(&s.id, 1, entry(2, "Ib")).unwrap_err();
        assert_eq!(e.status(), 409);
        let e = st.add_override(&s.id, 2, entry(99, "Ib")).unwrap_err();
        assert_eq!(e.status(), 404);
        let loaded = st.get(&s.id).unwrap();
        loaded.verify().unwrap();
        assert_eq!(loaded.analysis.taxonomy.overrides.len(), 1);
    }

    #[test]
    fn cut_resets_ledger() {
        let (_d, st) = store();
        let s = st
            .create(
                CSV.as_bytes(),
                Format::Csv,
                &parse(),
                &AnalysisOptions {
                    cut: CutRequest::ByCount(2),
                    ..Default::default()
                },
            )
            .unwrap();
        st.add_override(&s.id, 1, entry(1, "Ia")).unwrap();
        let c = st.cut(&s.id, None, CutRequest::ByCount(4), None).unwrap();
        assert_eq!(c.version, 3);
        assert_eq!(c.analysis.taxonomy.base_cut.group_count(), 4);
        assert!(c.analysis.taxonomy.overrides.is_empty());
        assert_eq!(
            st.cut(&s.id, None, CutRequest::ByCount(9), None)
                .unwrap_err()
                .status(),
            400
        );
    }
}
