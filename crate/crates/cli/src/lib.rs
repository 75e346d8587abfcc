//! File formats and command implementations behind the `fourier3` binary.
//!
//! The binary is a thin wrapper around [`commands::run`]; the readers here are
//! public so that outputs can be checked or post-processed from Rust.

pub mod commands;
pub mod error;
pub mod field;
pub mod grid;
pub mod manifest;
pub mod table;

pub use error::{CliError, Result};

// Snippets of the book's command line chapter.
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/cli.md")]
mod book {}
