//! Butterfly networks and their general position sets.
//!
//! The crate builds butterfly graphs (plus cycles and paths for
//! calibration), computes hop distances, verifies and searches for general
//! position sets, and constructs and verifies edge-disjoint isometric cycle
//! covers whose size bounds the gp-number from above.

pub mod cli;
pub mod cover;
pub mod error;
pub mod genpos;
pub mod geodesy;
pub mod graph;
pub mod io;

pub use error::{Error, Result};
pub use graph::{Graph, VertexId};
