//! File formats, configuration, the acceptance suite and the `psvf` command
//! line on top of `psvf-core`.

pub mod checks;
pub mod commands;
pub mod config;
pub mod formats;
pub mod oracle;
