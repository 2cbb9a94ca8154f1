//! Configuration, persistence and verbs behind the `enaqt` binary.

pub mod analysis;
pub mod artifacts;
pub mod commands;
pub mod config;

pub use config::{parse_config, parse_config_str, Analysis, RunSpec};
