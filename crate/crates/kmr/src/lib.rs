//! Reports, mesh export and the command-line front end for the KMR graphs
//! computed by `kmr-core`.

pub mod cli;
pub mod format;
pub mod obj;
pub mod parallel;
pub mod report;

pub use kmr_core;
