//! Command-line front end: configuration files, subcommand dispatch and report files.

pub mod app;
pub mod config;

pub use app::{run_main, ExitStatus};
pub use config::{parse_config, read_config, Config, ConfigError, OutputConfig, StudyConfig};
