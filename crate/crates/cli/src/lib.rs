//! Command-line front end for the `pmqsopt` solver: flat configs, multi-seed
//! experiments with CSV and manifest output, slope reports and metric
//! re-evaluation.

// Negated comparisons like `!(x > 0.0)` are NaN guards.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod app;
pub mod config;
pub mod error;
pub mod experiment;
pub mod reeval;
pub mod slope;
pub mod table;

pub use error::{CliError, CliResult};
