//! Scenario format and the built-in catalog.

use std::path::Path;

use serde::{Deserialize, Serialize};

/// One experiment: an ordered pipeline of named operations with parameters.
/// Fully deterministic given `(scenario, seed)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub pipeline: Vec<OpCall>,
}

fn default_seed() -> u64 {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OpCall {
    pub op: String,
    #[serde(default)]
    pub params: serde_json::Value,
}

#[derive(Debug)]
pub enum ScenarioError {
    Parse { line: usize, column: usize, msg: String },
    UnknownOp(String),
    Io(std::io::Error),
}

impl std::fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ScenarioError::Parse { line, column, msg } => {
                write!(f, "scenario parse error at line {line}, column {column}: {msg}")
            }
            ScenarioError::UnknownOp(op) => write!(f, "unknown operation `{op}`"),
            ScenarioError::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        serde_json::from_str(text).map_err(|e| ScenarioError::Parse {
            line: e.line(),
            column: e.column(),
            msg: e.to_string(),
        })
    }

    pub fn from_file(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(ScenarioError::Io)?;
        Self::from_json(&text)
    }

    /// Check that every referenced operation exists.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        for call in &self.pipeline {
            if !crate::ops::registry().contains_key(call.op.as_str()) {
                return Err(ScenarioError::UnknownOp(call.op.clone()));
            }
        }
        Ok(())
    }
}

fn builtin(name: &str, description: &str, ops: &[&str]) -> Scenario {
    Scenario {
        name: name.into(),
        description: description.into(),
        seed: 1,
        pipeline: ops
            .iter()
            .map(|&op| OpCall {
                op: op.into(),
                params: serde_json::Value::Null,
            })
            .collect(),
    }
}

/// Built-in scenarios with rough runtime estimates (laptop-class machine).
pub fn builtin_scenarios() -> Vec<(Scenario, &'static str)> {
    vec![
        (
            builtin(
                "free_decay",
                "Sup-norm decay of the free 3D evolution: exponent 3/2",
                &["free_decay"],
            ),
            "~1 min",
        ),
        (
            builtin(
                "wave_operator_defects",
                "Cook wave operator: isometry and intertwining defects vs horizon",
                &["wave_operator_defects"],
            ),
            "~4 min",
        ),
        (
            builtin(
                "w1_cross_check",
                "First Dyson term: translation/reflection representation vs momentum route",
                &["w1_cross_check"],
            ),
            "~4 min",
        ),
        (
            builtin(
                "born_vs_inversion",
                "Born series vs direct Birman-Schwinger inversion; divergence for -5W⁴",
                &["born_vs_inversion"],
            ),
            "~2 min",
        ),
        (
            builtin(
                "zero_energy_classification",
                "Zero-energy regularity: resonance detection, null vector, M₀₀, bound states",
                &["zero_energy_classification"],
            ),
            "~4 min",
        ),
        (
            builtin(
                "resonant_decay",
                "Dispersive decay dichotomy: regular t^{-3/2} vs resonant t^{-1/2}",
                &["resonant_decay"],
            ),
            "~6 min",
        ),
        (
            builtin(
                "wiener_engine",
                "Convolution-algebra inversion of 1+T⁻, Neumann series, symbol identity",
                &["wiener_engine"],
            ),
            "~4 min",
        ),
        (
            builtin(
                "kato_norms",
                "Kato norm values and the algebra-norm bound for T⁻",
                &["kato_norms"],
            ),
            "~30 s",
        ),
        (
            builtin(
                "stein_tomas",
                "Sphere transform decay, dyadic operator slopes, Knapp cap geometry",
                &["stein_tomas"],
            ),
            "~4 min",
        ),
        (
            builtin(
                "strichartz_nls",
                "Space-time L⁶ probe on the line and the small-data NLS fixed point",
                &["strichartz_nls"],
            ),
            "~3 min",
        ),
        (
            builtin(
                "determinism_algebra",
                "Algebra axioms on seeded random families (rerun for byte-identity)",
                &["algebra_axioms"],
            ),
            "~1 min",
        ),
    ]
}

pub fn find_builtin(name: &str) -> Option<Scenario> {
    builtin_scenarios()
        .into_iter()
        .map(|(s, _)| s)
        .find(|s| s.name == name)
}
