//! Experiment harness around `bbm-core`: output formats, parallel Monte
//! Carlo drivers, and the machine-readable acceptance report.

pub mod criteria;
pub mod experiments;
pub mod io;
pub mod runner;
