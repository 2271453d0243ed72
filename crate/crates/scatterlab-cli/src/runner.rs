//! Deterministic scenario execution: runs the pipeline, writes artifacts
//! under `<out>/<scenario-name>/`, and collects named pass/fail checks.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::ops::{registry, OpContext};
use crate::scenario::{Scenario, ScenarioError};

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub scenario: String,
    pub seed: u64,
    pub checks: Vec<CheckResult>,
}

impl RunReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Debug)]
pub enum RunError {
    Config(ScenarioError),
    Numeric(scatterlab::ScatterError),
    Io(std::io::Error),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "{e}"),
            RunError::Numeric(e) => write!(f, "numeric error: {e}"),
            RunError::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

/// Execute the scenario. Artifacts land in `<out>/<name>/`; an empty
/// pipeline succeeds without writing anything.
pub fn run_scenario(
    scenario: &Scenario,
    out_root: &Path,
    seed_override: Option<u64>,
) -> Result<RunReport, RunError> {
    scenario.validate().map_err(RunError::Config)?;
    let seed = seed_override.unwrap_or(scenario.seed);
    let out_dir: PathBuf = out_root.join(&scenario.name);
    let reg = registry();
    let mut checks = Vec::new();
    for call in &scenario.pipeline {
        let op = reg
            .get(call.op.as_str())
            .ok_or_else(|| RunError::Config(ScenarioError::UnknownOp(call.op.clone())))?;
        std::fs::create_dir_all(&out_dir).map_err(RunError::Io)?;
        let ctx = OpContext {
            out_dir: out_dir.clone(),
            seed,
            params: call.params.clone(),
        };
        let mut results = op(&ctx).map_err(RunError::Numeric)?;
        checks.append(&mut results);
    }
    let report = RunReport {
        scenario: scenario.name.clone(),
        seed,
        checks,
    };
    if !scenario.pipeline.is_empty() {
        scatterlab::io::write_json(&out_dir.join("summary.json"), &report)
            .map_err(RunError::Numeric)?;
    }
    Ok(report)
}
