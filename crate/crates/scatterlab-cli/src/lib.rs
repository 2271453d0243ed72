//! Scenario-driven front end for the scatterlab numerical laboratory:
//! a catalog of built-in experiment pipelines (one per headline check),
//! a JSON scenario format for custom runs, and a deterministic runner that
//! emits CSV tables, JSON reports and gnuplot scripts.

pub mod ops;
pub mod runner;
pub mod scenario;

pub use runner::{run_scenario, CheckResult, RunReport};
pub use scenario::{builtin_scenarios, Scenario};
