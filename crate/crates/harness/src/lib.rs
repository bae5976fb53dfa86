//! Configuration, corpora, experiment suites and reports for the
//! `tentspace` command line.

pub mod cli;
pub mod config;
pub mod corpus;
pub mod report;
pub mod suites;

pub use config::ExperimentConfig;
pub use report::Report;
pub use suites::run_suite;
