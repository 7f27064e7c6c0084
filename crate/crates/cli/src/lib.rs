//! Scenario files, bundled QNM data, parallel sweeps and CSV/JSON output for
//! `qnm-usc-core`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod data;
pub mod error;
pub mod output;
pub mod run;

pub use error::CliError;
