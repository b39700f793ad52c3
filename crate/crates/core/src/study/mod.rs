//! Study design, simulated participants, logging and analysis.

pub mod agent;
pub mod analysis;
pub mod log;
pub mod plan;
pub mod run;
