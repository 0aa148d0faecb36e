//! Statistics for comparing peer-review ratings of research teams with
//! bibliometric indicators.
//!
//! The crate covers aggregation of expert scores, agreement between
//! experts, consistency between indicators (rating habits), citation-based
//! indicators, cross-method correlation, and a Monte Carlo model of rating
//! behaviour. The `peerstat` binary wraps the same functions for data
//! bundles on disk.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod aggregation;
pub mod agreement;
pub mod bibliometrics;
pub mod cli;
pub mod comparison;
pub mod error;
pub mod io;
pub mod model;
pub mod pipeline;
pub mod report;
pub mod sim;
pub mod stats;

pub use error::{Error, Result};
