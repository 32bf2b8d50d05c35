use std::fmt;
use std::path::Path;

use routevar_core::chaos::ChaosError;
use routevar_core::crdl::CrdlError;
use routevar_core::frameparse::{FrameError, GrammarError};
use routevar_core::icmap::MapError;
use routevar_core::symbolize::SymbolError;
use routevar_core::vomm::VommError;
use serde::Serialize;
use serde_json::{json, Value};

use crate::store::StoreError;

/// How an error maps onto HTTP statuses and CLI exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    /// Malformed request or arguments (400).
    Validation,
    /// Unknown id (404).
    NotFound,
    /// Explicit id already taken (409).
    Conflict,
    /// A module rejected well-formed input (422).
    Domain,
    /// File system or other environment failure (500).
    Io,
}

impl ErrorKind {
    pub fn status(self) -> u16 {
        match self {
            ErrorKind::Validation => 400,
            ErrorKind::NotFound => 404,
            ErrorKind::Conflict => 409,
            ErrorKind::Domain => 422,
            ErrorKind::Io => 500,
        }
    }
}

/// The structured error shared by the HTTP API and the CLI.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Error {
    #[serde(skip)]
    pub kind: ErrorKind,
    pub code: String,
    pub message: String,
    pub detail: Value,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn new(kind: ErrorKind, code: &str, message: impl Into<String>) -> Error {
        Error {
            kind,
            code: code.to_string(),
            message: message.into(),
            detail: Value::Null,
        }
    }

    pub fn with_detail(mut self, detail: Value) -> Error {
        self.detail = detail;
        self
    }

    pub fn validation(message: impl Into<String>) -> Error {
        Error::new(ErrorKind::Validation, "ValidationFailed", message)
    }

    pub fn not_found(what: &str, id: &str) -> Error {
        Error::new(
            ErrorKind::NotFound,
            "NotFound",
            format!("no {what} with id {id:?}"),
        )
        .with_detail(json!({ "id": id }))
    }

    pub fn io(path: &Path, err: std::io::Error) -> Error {
        Error::new(
            ErrorKind::Io,
            "IoError",
            format!("{}: {err}", path.display()),
        )
        .with_detail(json!({ "path": path.display().to_string() }))
    }

    /// Adds the offending file to the detail object.
    pub fn with_path(mut self, path: &Path) -> Error {
        let p = Value::String(path.display().to_string());
        match &mut self.detail {
            Value::Object(map) => {
                map.insert("path".into(), p);
            }
            _ => self.detail = json!({ "path": p }),
        }
        self
    }

    pub fn status(&self) -> u16 {
        self.kind.status()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("error serializes")
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code, self.message)
    }
}

impl std::error::Error for Error {}

impl From<CrdlError> for Error {
    fn from(e: CrdlError) -> Self {
        let detail = match e.line() {
            Some(line) => json!({ "line": line }),
            None => Value::Null,
        };
        Error::new(ErrorKind::Domain, e.code(), e.to_string()).with_detail(detail)
    }
}

impl From<ChaosError> for Error {
    fn from(e: ChaosError) -> Self {
        let (kind, detail) = match &e {
            ChaosError::LeadingMatch { route, index } => {
                (ErrorKind::Domain, json!({ "route": route, "index": index }))
            }
            ChaosError::NonFiniteState { step } => (ErrorKind::Domain, json!({ "step": step })),
            ChaosError::InvalidConfig(_) => (ErrorKind::Validation, Value::Null),
            ChaosError::EmptyInput => (ErrorKind::Domain, Value::Null),
        };
        Error::new(kind, e.code(), e.to_string()).with_detail(detail)
    }
}

impl From<MapError> for Error {
    fn from(e: MapError) -> Self {
        match e {
            MapError::Chaos(inner) => inner.into(),
            MapError::InvalidSpec(_) | MapError::EmptySequence => {
                Error::new(ErrorKind::Validation, e.code(), e.to_string())
            }
            MapError::VersionMismatch { found, expected } => {
                Error::new(ErrorKind::Domain, e.code(), e.to_string())
                    .with_detail(json!({ "found": found, "expected": expected }))
            }
            MapError::CorruptFile(_) => Error::new(ErrorKind::Domain, e.code(), e.to_string()),
        }
    }
}

impl From<VommError> for Error {
    fn from(e: VommError) -> Self {
        let (kind, detail) = match &e {
            VommError::UnknownSymbol { seq, pos, symbol } => (
                ErrorKind::Domain,
                json!({ "seq": seq, "pos": pos, "symbol": symbol }),
            ),
            VommError::JTooLarge(j) => (ErrorKind::Validation, json!({ "j_max": j })),
            VommError::InvalidOrder(d) => (ErrorKind::Validation, json!({ "order": d })),
            VommError::VersionMismatch { found, expected } => (
                ErrorKind::Domain,
                json!({ "found": found, "expected": expected }),
            ),
            _ => (ErrorKind::Domain, Value::Null),
        };
        Error::new(kind, e.code(), e.to_string()).with_detail(detail)
    }
}

impl From<FrameError> for Error {
    fn from(e: FrameError) -> Self {
        Error::new(ErrorKind::Domain, e.code(), e.to_string())
    }
}

impl From<SymbolError> for Error {
    fn from(e: SymbolError) -> Self {
        Error::new(ErrorKind::Domain, e.code(), e.to_string())
    }
}

impl From<GrammarError> for Error {
    fn from(e: GrammarError) -> Self {
        Error::new(ErrorKind::Domain, e.code(), e.to_string())
    }
}

impl From<StoreError> for Error {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::NotFound(id) => Error::not_found("record", &id),
            StoreError::DuplicateId(ref id) => {
                Error::new(ErrorKind::Conflict, "DuplicateId", e.to_string())
                    .with_detail(json!({ "id": id }))
            }
            StoreError::ValidationFailed { ref cause } => {
                let mut err = (**cause).clone();
                err.detail = json!({ "cause": err.code, "detail": err.detail });
                err.code = "ValidationFailed".into();
                err
            }
            StoreError::Io(path, msg) => Error::new(ErrorKind::Io, "IoError", msg)
                .with_detail(json!({ "path": path.display().to_string() })),
            StoreError::Corrupt(ref msg) => Error::new(ErrorKind::Io, "CorruptStore", msg.clone()),
        }
    }
}
