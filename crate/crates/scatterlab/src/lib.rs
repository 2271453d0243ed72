//! A desk-scale numerical laboratory for two-body Schrödinger scattering
//! theory in 3D-radial and 1D settings.
//!
//! The crate is organized around the objects of stationary and time-dependent
//! scattering theory for `H = -Δ + V` with a real radial potential `V`:
//!
//! - [`numerics`]: grids, quadrature, sine/line transforms, oscillatory
//!   integrals, and power-law exponent fitting shared by everything else.
//! - [`potentials`]: a library of test potentials (Gaussian, Yukawa, the
//!   Aubin-Talenti linearization `-5W⁴`, tabulated) and every potential norm
//!   used downstream (Kato 𝒦, dyadic `B^β`, `Y`, maximal `M_q`).
//! - [`freefield`]: the free propagator `e^{-itH₀}` and free resolvent
//!   kernels `R₀(λ² ± iε)` in radial reduction, plus resolvent decay probes.
//! - [`birman`]: assembly and inversion of the Birman-Schwinger operator
//!   `I + R₀(λ)V`, Born series, zero-energy regularity detection, and the
//!   regularity constants `M₀`, `M₀₀`.
//! - [`waveop`]: wave operators by Cook time integration, Dyson-series terms,
//!   the structure function `L(r,ω)` of the first Dyson term and its
//!   translation/reflection representation, and `L^p` boundedness probes.
//! - [`wiener`]: the operator-valued convolution algebra of kernel families
//!   on the ρ-line, its Fourier symbol calculus, and Wiener-type inversion.
//! - [`restriction`]: surface-measure Fourier transforms, the dyadic pieces
//!   of the sphere restriction operator, the Knapp cap example, and
//!   space-time (Strichartz) norm probes.
//! - [`dispersive`]: the perturbed evolution `e^{-itH}` by split-step
//!   integration, bound-state projection, decay exponent measurement, and a
//!   small-data mass-critical NLS fixed-point solver.
//!
//! All operations are pure and deterministic; sweeps over energies, packet
//! families and dyadic indices are embarrassingly parallel and use rayon
//! with order-preserving collection, so results do not depend on thread
//! scheduling.

pub mod birman;
pub mod dispersive;
pub mod error;
pub mod freefield;
pub mod io;
pub mod linalg;
pub mod numerics;
pub mod potentials;
pub mod restriction;
pub mod waveop;
pub mod wiener;

pub use error::{Result, ScatterError};

/// Complex scalar used throughout the crate.
pub type C64 = num_complex::Complex<f64>;
