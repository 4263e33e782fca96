//! Contact-network analysis toolkit.
//!
//! Reconstructs an anonymized sexual-contact graph from vertex/edge tables and
//! provides the statistical machinery to analyse it: degree-tail fitting
//! (KL-minimization and Hill estimation), geodesic statistics, mixing matrices
//! and assortativity, connectivity-constrained modularity clustering with
//! configuration-model null testing, force-directed layouts and SVG figure
//! rendering.

#![forbid(unsafe_code)]

pub mod community;
pub mod degree;
pub mod graph;
pub mod io;
pub mod layout;
pub mod mixing;
pub mod nullmodel;
pub mod report;
pub mod rng;
pub mod stats;
pub mod svg;

pub use graph::ContactGraph;
pub use io::{DetectionMode, EdgeRecord, NamedBy, Orientation, VertexRecord};
