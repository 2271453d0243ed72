//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, ScatterError>;

#[derive(Debug, Error)]
pub enum ScatterError {
    /// Oscillatory-integral amplitude does not decay beyond the truncation radius.
    #[error("amplitude not decaying beyond truncation radius {radius}: tail ratio {ratio:.3e}")]
    NonDecayingAmplitude { radius: f64, ratio: f64 },

    /// A log-log fit was asked to process a non-positive sample.
    #[error("non-positive value {value:.6e} at t = {t:.6e} inside the fit window")]
    NonPositiveSample { t: f64, value: f64 },

    /// Too few samples for a requested operation.
    #[error("{what}: have {have} samples, need at least {need}")]
    TooFewSamples {
        what: &'static str,
        have: usize,
        need: usize,
    },

    /// A grid is too small (in extent or resolution) for the requested computation.
    #[error("grid too small: {0}")]
    GridTooSmall(String),

    /// Two objects were combined that live on incompatible grids.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// Quadrature nodes do not resolve the requested oscillation.
    #[error("undersampled oscillation: spacing {spacing:.3e} exceeds limit {limit:.3e}")]
    Undersampled { spacing: f64, limit: f64 },

    /// An integral that must be finite diverges for the given profile.
    #[error("divergent integral: {0}")]
    DivergentIntegral(String),

    /// Truncation tail of a shell sum cannot be bounded below the requested fraction.
    #[error("truncation tail {tail:.3e} exceeds {limit:.3e} of the partial sum")]
    TruncationTail { tail: f64, limit: f64 },

    /// The Birman-Schwinger operator is singular (or nearly so) at this energy.
    #[error("singular Birman-Schwinger operator at λ = {lambda:.6e} (σ_min = {sigma_min:.3e})")]
    SingularAtEnergy { lambda: f64, sigma_min: f64 },

    /// The Wiener symbol `I + T̂(λ)` fails to be invertible at some frequency.
    #[error("non-invertible symbol at λ = {lambda:.6e} (σ_min = {sigma_min:.3e})")]
    NonInvertibleSymbol { lambda: f64, sigma_min: f64 },

    /// Mass reaching the domain boundary exceeds the admissible fraction.
    #[error("boundary mass fraction {fraction:.3e} exceeds {limit:.3e}; enlarge the domain")]
    Horizon { fraction: f64, limit: f64 },

    /// Fixed-point iteration failed to contract (data not small enough).
    #[error("contraction factor {factor:.3} ≥ 1: smallness condition violated")]
    SmallnessViolated { factor: f64 },

    /// A named precondition failed.
    #[error("{0}")]
    Precondition(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv parse error at line {line}: {msg}")]
    CsvParse { line: usize, msg: String },
}
