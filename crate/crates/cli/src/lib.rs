//! Command-line front end: file formats, configuration, reports and the
//! verbs behind the `ethics-audit` binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod logio;
pub mod report;

pub use config::Config;
pub use error::{CliError, Result};
pub use report::AuditReport;
