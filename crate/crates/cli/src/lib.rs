//! Config-driven runner behind the `airy-lab` binary.

pub mod catalog;
pub mod config;
pub mod experiments;
pub mod report;
