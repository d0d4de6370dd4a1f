//! Std companion of `nclp-core`: JSON and CSV formats, suite reports and the
//! `nclp` command line.

pub mod cli;
pub mod formats;
pub mod report;
