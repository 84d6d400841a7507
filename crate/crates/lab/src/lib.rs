//! Presets, reports and the command-line harness around `dispersive-core`.
//!
//! Physical times are obtained from model times (units of `1/g`) by
//! dividing by the preset's physical `g`; nothing else in the pipeline uses
//! SI units.

pub mod budget;
pub mod cli;
pub mod config;
pub mod engine;
pub mod error;
pub mod experiments;
pub mod preset;
pub mod report;

pub use error::{LabError, LabResult};
