//! File formats, synthetic data and parallel pipelines around
//! [`dephase_core`], plus the `dephase` command-line tool.
//!
//! - [`formats`]: spectrum files, series manifests, JSON result records.
//! - [`synth`]: seeded synthetic temperature series.
//! - [`pipeline`]: rayon-parallel fitting and Monte-Carlo drivers.

pub mod error;
pub mod formats;
pub mod pipeline;
pub mod synth;

pub use dephase_core as core;
pub use error::{Error, ErrorClass, Result};
