//! File formats: price CSV in, config JSON in, schedule CSV and report
//! JSON out.

pub mod config;
pub mod lmp;
pub mod reports;
pub mod schedule_csv;
