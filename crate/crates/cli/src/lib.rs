//! Command-line front end for `ultradiff-core`: file formats, run
//! configuration, reports, end-to-end pipelines and the acceptance suite.

pub mod config;
pub mod error;
pub mod formats;
pub mod pipelines;
pub mod report;
pub mod suite;
pub mod commands;
