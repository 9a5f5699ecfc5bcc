//! Command-line front end: configuration files, sweeps, plots and the
//! validation report.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod plot;
pub mod sweep;
pub mod validate;
