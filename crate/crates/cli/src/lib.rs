//! Library side of the `visilat` command: configuration, the experiment
//! pipeline and report formats.

pub mod config;
pub mod error;
pub mod report;
