//! Files, storage, HTTP API and command line around `routevar-core`.

pub mod api;
pub mod error;
pub mod formats;
pub mod pipeline;
pub mod store;
pub mod sweep;

pub use error::{Error, ErrorKind};
pub use routevar_core as core;
