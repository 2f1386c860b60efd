//! Temporal co-starring networks with regional-boundary measurement.
//!
//! The crate turns actor-work cast tables into per-period collaboration
//! graphs, then quantifies how strongly a regional boundary suppresses
//! collaboration: once via a degree-preserving randomization index and once
//! via exponential random graph models with homophily terms.

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub mod ergm;
pub mod error;
pub mod graph;
pub mod ingest;
pub mod null_model;
pub mod report;
pub mod synth;

pub use ergm::{ErgmFit, TermSpec};
pub use error::{Error, Result};
pub use graph::{CollabNetwork, NodeAttributes, NodeId, PeriodSpec, Region};
pub use ingest::{Dataset, LoadOptions, PopularityMeasure};
pub use null_model::{cross_region_index, IndexResult, SwapConfig};
