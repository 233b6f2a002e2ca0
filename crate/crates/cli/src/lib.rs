//! Scenario loading and report generation behind the `qpos` binary.

pub mod report;
pub mod scenario;
