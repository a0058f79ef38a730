//! Command implementations behind the `maiou` binary.
//!
//! Each command computes its full result before touching the output
//! directory, so a failed run leaves nothing behind.

pub mod commands;
pub mod config;
