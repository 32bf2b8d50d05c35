//! A directory-backed record store.
//!
//! Layout:
//!
//! ```text
//! <root>/index.json          listing of every record, payloads omitted
//! <root>/records/<id>.json   one StoredRecord per file
//! ```
//!
//! Every file is written to a temporary sibling and renamed into place, so a
//! reader never sees a half-written record or index. The record file lands
//! before the index that lists it; a crash in between leaves an unlisted file
//! that is ignored. One process may write a store at a time; readers may be
//! many.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use routevar_core::chaos::VariationPlan;
use routevar_core::crdl::parse_crdl;
use routevar_core::icmap::ICMap;
use routevar_core::symbolize::SymbolSetId;
use routevar_core::vomm::VommModel;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Error;

pub const STORE_FORMAT_VERSION: u32 = 1;
const ID_BYTES: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecordKind {
    Route,
    Variation,
    Model,
    Icmap,
}

impl RecordKind {
    pub const ALL: [RecordKind; 4] = [
        RecordKind::Route,
        RecordKind::Variation,
        RecordKind::Model,
        RecordKind::Icmap,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RecordKind::Route => "route",
            RecordKind::Variation => "variation",
            RecordKind::Model => "model",
            RecordKind::Icmap => "icmap",
        }
    }
}

impl fmt::Display for RecordKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A record as listed in the index.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordMeta {
    pub id: String,
    pub kind: RecordKind,
    /// Milliseconds since the Unix epoch.
    pub created_at: u64,
    /// Store-wide insertion counter; orders records created in the same millisecond.
    pub seq: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub owner: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grade: Option<String>,
    /// Symbol set a model was trained on.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symbol_set: Option<SymbolSetId>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoredRecord {
    #[serde(flatten)]
    pub meta: RecordMeta,
    /// The module-native serialization: CRDL text for routes, JSON for
    /// plans, models and maps. Stored and returned byte for byte.
    pub payload: String,
}

/// What a caller hands to [`Store::put`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NewRecord {
    pub kind: RecordKind,
    pub payload: String,
    /// Requested id; a content hash is derived when absent.
    pub id: Option<String>,
    pub owner: Option<String>,
    /// Overrides the grade read from a route header.
    pub grade: Option<String>,
    pub symbol_set: Option<SymbolSetId>,
}

impl NewRecord {
    pub fn new(kind: RecordKind, payload: impl Into<String>) -> NewRecord {
        NewRecord {
            kind,
            payload: payload.into(),
            id: None,
            owner: None,
            grade: None,
            symbol_set: None,
        }
    }

    pub fn owner(mut self, owner: Option<String>) -> NewRecord {
        self.owner = owner;
        self
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ListFilter {
    pub owner: Option<String>,
    pub grade: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum StoreError {
    NotFound(String),
    /// The payload failed its module's loader, or a variation names a route
    /// the store does not hold.
    ValidationFailed {
        cause: Box<Error>,
    },
    DuplicateId(String),
    Io(PathBuf, String),
    Corrupt(String),
}

impl fmt::Display for StoreError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StoreError::NotFound(id) => write!(f, "no record with id {id:?}"),
            StoreError::ValidationFailed { cause } => write!(f, "payload rejected: {cause}"),
            StoreError::DuplicateId(id) => write!(f, "id {id:?} is already taken"),
            StoreError::Io(path, msg) => write!(f, "{}: {msg}", path.display()),
            StoreError::Corrupt(msg) => write!(f, "corrupt store: {msg}"),
        }
    }
}

impl std::error::Error for StoreError {}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> StoreError + '_ {
    move |e| StoreError::Io(path.to_path_buf(), e.to_string())
}

#[derive(Serialize, Deserialize)]
struct IndexFile {
    format_version: u32,
    next_seq: u64,
    records: Vec<RecordMeta>,
}

pub struct Store {
    root: PathBuf,
    entries: Vec<RecordMeta>,
    by_id: HashMap<String, usize>,
    next_seq: u64,
}

fn now_millis() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

/// Short content hash of a payload; `attempt` salts it after a collision.
pub fn content_id(kind: RecordKind, payload: &str, attempt: u32) -> String {
    let mut hasher = Sha256::new();
    hasher.update(kind.as_str().as_bytes());
    hasher.update([0u8]);
    hasher.update(payload.as_bytes());
    if attempt > 0 {
        hasher.update([0u8]);
        hasher.update(attempt.to_be_bytes());
    }
    let digest = hasher.finalize();
    digest[..ID_BYTES]
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn valid_id(id: &str) -> bool {
    !id.is_empty()
        && id.len() <= 64
        && id
            .bytes()
            .all(|b| b.is_ascii_alphanumeric() || b == b'-' || b == b'_')
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), StoreError> {
    let tmp = path.with_extension("tmp");
    let mut file = fs::File::create(&tmp).map_err(io_err(&tmp))?;
    file.write_all(bytes).map_err(io_err(&tmp))?;
    file.sync_all().map_err(io_err(&tmp))?;
    drop(file);
    fs::rename(&tmp, path).map_err(io_err(path))
}

fn rejected(err: impl Into<Error>) -> StoreError {
    StoreError::ValidationFailed {
        cause: Box::new(err.into()),
    }
}

impl Store {
    /// Opens the store at `root`, creating an empty one if none exists.
    pub fn open(root: impl AsRef<Path>) -> Result<Store, StoreError> {
        let root = root.as_ref().to_path_buf();
        let records = root.join("records");
        fs::create_dir_all(&records).map_err(io_err(&records))?;
        let index_path = root.join("index.json");
        let index = match fs::read_to_string(&index_path) {
            Ok(text) => serde_json::from_str::<IndexFile>(&text)
                .map_err(|e| StoreError::Corrupt(format!("index.json: {e}")))?,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => IndexFile {
                format_version: STORE_FORMAT_VERSION,
                next_seq: 0,
                records: Vec::new(),
            },
            Err(e) => return Err(StoreError::Io(index_path, e.to_string())),
        };
        if index.format_version != STORE_FORMAT_VERSION {
            return Err(StoreError::Corrupt(format!(
                "index format version {}, expected {STORE_FORMAT_VERSION}",
                index.format_version
            )));
        }
        let by_id = index
            .records
            .iter()
            .enumerate()
            .map(|(i, m)| (m.id.clone(), i))
            .collect();
        Ok(Store {
            root,
            entries: index.records,
            by_id,
            next_seq: index.next_seq,
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.by_id.contains_key(id)
    }

    fn record_path(&self, id: &str) -> PathBuf {
        self.root.join("records").join(format!("{id}.json"))
    }

    fn save_index(&self) -> Result<(), StoreError> {
        let index = IndexFile {
            format_version: STORE_FORMAT_VERSION,
            next_seq: self.next_seq,
            records: self.entries.clone(),
        };
        let mut text = serde_json::to_string_pretty(&index).expect("index serializes");
        text.push('\n');
        write_atomic(&self.root.join("index.json"), text.as_bytes())
    }

    /// Checks the payload with its module's loader; returns the grade a
    /// route header carries.
    fn validate(&self, kind: RecordKind, payload: &str) -> Result<Option<String>, StoreError> {
        match kind {
            RecordKind::Route => Ok(parse_crdl(payload).map_err(rejected)?.grade),
            RecordKind::Variation => {
                let plan: VariationPlan = serde_json::from_str(payload).map_err(|e| {
                    rejected(Error::new(
                        crate::error::ErrorKind::Domain,
                        "CorruptFile",
                        format!("variation plan: {e}"),
                    ))
                })?;
                for input in &plan.inputs {
                    if self.kind_of(input) != Some(RecordKind::Route) {
                        return Err(rejected(Error::not_found("route", input)));
                    }
                }
                Ok(None)
            }
            RecordKind::Model => {
                VommModel::from_json(payload).map_err(rejected)?;
                Ok(None)
            }
            RecordKind::Icmap => {
                ICMap::from_json(payload).map_err(rejected)?;
                Ok(None)
            }
        }
    }

    fn kind_of(&self, id: &str) -> Option<RecordKind> {
        self.by_id.get(id).map(|&i| self.entries[i].kind)
    }

    pub fn put(&mut self, record: NewRecord) -> Result<String, StoreError> {
        let kind = record.kind;
        let header_grade = self.validate(kind, &record.payload)?;
        let id = match record.id {
            Some(id) => {
                if !valid_id(&id) {
                    return Err(rejected(Error::validation(format!(
                        "id {id:?} must be 1-64 characters of [A-Za-z0-9_-]"
                    ))));
                }
                if self.contains(&id) {
                    return Err(StoreError::DuplicateId(id));
                }
                id
            }
            None => (0..)
                .map(|attempt| content_id(kind, &record.payload, attempt))
                .find(|id| !self.contains(id))
                .expect("some salt is free"),
        };
        let meta = RecordMeta {
            id: id.clone(),
            kind,
            created_at: now_millis(),
            seq: self.next_seq,
            owner: record.owner,
            grade: record.grade.or(header_grade),
            symbol_set: record.symbol_set,
        };
        let stored = StoredRecord {
            meta: meta.clone(),
            payload: record.payload,
        };
        let mut text = serde_json::to_string_pretty(&stored).expect("record serializes");
        text.push('\n');
        write_atomic(&self.record_path(&id), text.as_bytes())?;

        self.next_seq += 1;
        self.by_id.insert(id.clone(), self.entries.len());
        self.entries.push(meta);
        if let Err(e) = self.save_index() {
            self.entries.pop();
            self.by_id.remove(&id);
            self.next_seq -= 1;
            let _ = fs::remove_file(self.record_path(&id));
            return Err(e);
        }
        Ok(id)
    }

    pub fn meta(&self, id: &str) -> Result<&RecordMeta, StoreError> {
        self.by_id
            .get(id)
            .map(|&i| &self.entries[i])
            .ok_or_else(|| StoreError::NotFound(id.to_string()))
    }

    pub fn get(&self, id: &str) -> Result<StoredRecord, StoreError> {
        self.meta(id)?;
        let path = self.record_path(id);
        let text = fs::read_to_string(&path).map_err(io_err(&path))?;
        serde_json::from_str(&text).map_err(|e| StoreError::Corrupt(format!("{id}: {e}")))
    }

    /// Like [`Store::get`] but also fails with `NotFound` when the record is
    /// of another kind.
    pub fn get_kind(&self, id: &str, kind: RecordKind) -> Result<StoredRecord, StoreError> {
        if self.kind_of(id) != Some(kind) {
            return Err(StoreError::NotFound(id.to_string()));
        }
        self.get(id)
    }

    /// Records of one kind matching the filter, oldest first.
    pub fn list(&self, kind: RecordKind, filter: &ListFilter) -> Vec<RecordMeta> {
        let mut out: Vec<RecordMeta> = self
            .entries
            .iter()
            .filter(|m| m.kind == kind)
            .filter(|m| filter.owner.is_none() || m.owner == filter.owner)
            .filter(|m| filter.grade.is_none() || m.grade == filter.grade)
            .cloned()
            .collect();
        out.sort_by_key(|m| (m.created_at, m.seq));
        out
    }

    pub fn delete(&mut self, id: &str) -> Result<RecordMeta, StoreError> {
        let pos = *self
            .by_id
            .get(id)
            .ok_or_else(|| StoreError::NotFound(id.to_string()))?;
        let meta = self.entries.remove(pos);
        self.by_id = self
            .entries
            .iter()
            .enumerate()
            .map(|(i, m)| (m.id.clone(), i))
            .collect();
        self.save_index()?;
        let path = self.record_path(id);
        fs::remove_file(&path).map_err(io_err(&path))?;
        Ok(meta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const ROUTE: &str = "grade: 5.11\n---\nR jug\nL crimp\n";

    #[test]
    fn content_ids_are_stable_and_salted() {
        let a = content_id(RecordKind::Route, ROUTE, 0);
        assert_eq!(a.len(), 2 * ID_BYTES);
        assert_eq!(a, content_id(RecordKind::Route, ROUTE, 0));
        assert_ne!(a, content_id(RecordKind::Route, ROUTE, 1));
        assert_ne!(a, content_id(RecordKind::Model, ROUTE, 0));
    }

    #[test]
    fn same_payload_twice_gets_a_fresh_id() {
        let dir = tempfile::tempdir().unwrap();
        let mut store = Store::open(dir.path()).unwrap();
        let a = store.put(NewRecord::new(RecordKind::Route, ROUTE)).unwrap();
        let b = store.put(NewRecord::new(RecordKind::Route, ROUTE)).unwrap();
        assert_eq!(a, content_id(RecordKind::Route, ROUTE, 0));
        assert_eq!(b, content_id(RecordKind::Route, ROUTE, 1));
        assert_eq!(store.meta(&a).unwrap().grade.as_deref(), Some("5.11"));
    }

    #[test]
    fn explicit_ids() {
        let dir = tempfile::tempdir().unwrap();
        let mut store = Store::open(dir.path()).unwrap();
        let rec = NewRecord {
            id: Some("p13".into()),
            ..NewRecord::new(RecordKind::Route, ROUTE)
        };
        store.put(rec.clone()).unwrap();
        assert_eq!(store.put(rec), Err(StoreError::DuplicateId("p13".into())));
        let bad = NewRecord {
            id: Some("../x".into()),
            ..NewRecord::new(RecordKind::Route, ROUTE)
        };
        assert!(matches!(
            store.put(bad),
            Err(StoreError::ValidationFailed { .. })
        ));
    }

    #[test]
    fn invalid_payloads_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let mut store = Store::open(dir.path()).unwrap();
        let err = store
            .put(NewRecord::new(RecordKind::Route, "---\nX jug\n"))
            .unwrap_err();
        match err {
            StoreError::ValidationFailed { cause } => assert_eq!(cause.code, "BadHandToken"),
            other => panic!("{other:?}"),
        }
        assert!(store.put(NewRecord::new(RecordKind::Model, "{}")).is_err());
        assert!(store.is_empty());
        assert_eq!(fs::read_dir(dir.path().join("records")).unwrap().count(), 0);
    }

    #[test]
    fn delete_removes_file_and_listing() {
        let dir = tempfile::tempdir().unwrap();
        let mut store = Store::open(dir.path()).unwrap();
        let id = store.put(NewRecord::new(RecordKind::Route, ROUTE)).unwrap();
        store.delete(&id).unwrap();
        assert_eq!(store.get(&id), Err(StoreError::NotFound(id.clone())));
        assert_eq!(store.delete(&id), Err(StoreError::NotFound(id)));
        assert!(store
            .list(RecordKind::Route, &ListFilter::default())
            .is_empty());
    }
}
