//! Experiment runner for `dtn-core`.
//!
//! Scenarios are read from TOML ([`config`]), executed per mesh level in
//! parallel ([`experiments`]), and written as `results.csv` plus a
//! `summary.json` with pass/fail per criterion ([`io`], [`report`]).

pub mod cli;
pub mod config;
pub mod error;
pub mod experiments;
pub mod io;
pub mod random;
pub mod report;

pub use error::{LabError, Result};
