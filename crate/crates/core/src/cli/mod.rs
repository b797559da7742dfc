//! Command surface: configuration, the four pipeline commands and reporting.

pub mod commands;
pub mod config;
pub mod report;

pub use config::{BackendKind, ConfigOverrides, PipelineConfig};
