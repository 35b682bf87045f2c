//! Identifiability analysis for linear dynamic networks in which only some
//! vertices are excited and only some are measured.
//!
//! A network is a simple directed graph whose edges carry unknown modules.
//! From the topology together with the excited set `R` and measured set `C`
//! this crate evaluates necessary conditions for recovering every module from
//! the transfer block `T_{C,R}` with `T = (I - G)^-1`, and decides
//! identifiability exactly when the graph is a single directed cycle.

pub mod circular;
pub mod combinatorics;
pub mod conditions;
pub mod error;
pub mod exec;
pub mod model;
pub mod numeric;
pub mod sample;
pub mod structure;

pub use conditions::{analyze, AnalysisOptions, AnalysisReport, Verdict};
pub use error::{Error, Result};
pub use exec::Execution;
pub use model::{NetworkModel, VertexSet};
