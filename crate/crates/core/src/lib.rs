//! Algorithmic core of the route variation workbench.
//!
//! Everything here is `no_std` + `alloc`: route documents are parsed from
//! and rendered to strings, trajectories and maps are plain vectors, and no
//! module touches the filesystem or a clock. The `routevar` crate layers
//! file formats, persistence, the HTTP service and the CLI on top.
//!
//! Modules:
//! - [`crdl`]: the route description format (header, separator, one hand move per line).
//! - [`chaos`]: Lorenz integration, nearest-neighbour symbol mapping and variation plans.
//! - [`icmap`]: effect/change sweeps over candidate variation initial conditions.
//! - [`frameparse`]: robust frame parsing of free-form move descriptions.
//! - [`symbolize`]: the four symbol sets derived from parsed frames.
//! - [`vomm`]: decomposed context-tree-weighting sequence models.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod chaos;
pub mod crdl;
pub mod frameparse;
pub mod icmap;
pub mod symbolize;
pub mod vomm;

/// Version tag written into every serialized artifact (plans, maps, models).
pub const FORMAT_VERSION: u32 = 1;
