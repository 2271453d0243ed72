//! Wave operators and their first Dyson terms.
//!
//! Three routes to the same objects are implemented and cross-checked:
//!
//! - [`cook_wave_operator`]: `W f = f + i∫₀^T e^{-εt} e^{itH} V e^{-itH₀} f dt`
//!   by time integration of the Duhamel integrand with the split-step
//!   propagator and extrapolation over an ε-schedule.
//! - [`DysonContext`]: the terms `W₁`, `W₂` of the expansion in powers of
//!   `V`, whose time integrals are evaluated analytically per sine-mode pair
//!   (the finite-horizon regularized integral `∫₀^T e^{(iΔ-ε)t} dt` has a
//!   closed form, so no time quadrature error enters).
//! - [`structure_l`] / [`apply_w1_structure`]: the representation of `W₁` as
//!   a weighted average of translations and reflections with the structure
//!   function `L(r) = ∫₀^∞ V̂(s) e^{irs/2} s ds`, up to one calibrated
//!   constant κ shared by all potentials.

use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::dispersive::SplitStepper;
use crate::error::{Result, ScatterError};
use crate::freefield::{PacketNorms, WavePacket};
use crate::numerics::{
    fit_power_law, gauss_legendre_on, oscillatory_integral, RadialGrid, SineTransform,
};
use crate::potentials::{Potential, PotentialKind};
use crate::C64;

const PI: f64 = std::f64::consts::PI;

// ---------------------------------------------------------------------------
// Cook time integration
// ---------------------------------------------------------------------------

/// Wave-operator output with its convergence diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct WaveOperatorResult {
    #[serde(skip)]
    pub output: Option<WavePacket>,
    pub input_norms: PacketNorms,
    pub horizon: f64,
    pub epsilon_schedule: Vec<f64>,
    /// Estimated `L²` mass of the discarded Duhamel tail `∫_T^∞`.
    pub tail_estimate: f64,
    /// Fitted decay exponent of `‖V e^{-itH₀} f‖₂`.
    pub integrand_exponent: f64,
    pub isometry_defect: f64,
    /// `(s, ‖e^{isH}Wf - We^{isH₀}f‖₂)` per probe time.
    pub intertwining_probes: Vec<(f64, f64)>,
    /// Sup over the probes.
    pub intertwining_defect: f64,
}

/// Default ε-schedule for the regularized Duhamel integral.
pub const DEFAULT_EPS_SCHEDULE: [f64; 3] = [0.2, 0.1, 0.05];

/// Lagrange weights extrapolating samples at `xs` to `x = 0`.
fn lagrange_at_zero(xs: &[f64]) -> Vec<f64> {
    xs.iter()
        .enumerate()
        .map(|(i, &xi)| {
            let mut w = 1.0;
            for (j, &xj) in xs.iter().enumerate() {
                if j != i {
                    w *= xj / (xj - xi);
                }
            }
            w
        })
        .collect()
}

struct CookEngine {
    stepper: SplitStepper,
    st: SineTransform,
    v_samples: Vec<f64>,
    ksq: Vec<f64>,
    f_raw: Vec<C64>,
    dt: f64,
}

impl CookEngine {
    fn new(grid: &Arc<RadialGrid>, v: &Potential, f_u: &[C64]) -> Self {
        let stepper = SplitStepper::new(grid, v);
        let st = SineTransform::new(grid);
        let ksq: Vec<f64> = (1..=grid.len()).map(|m| st.frequency(m).powi(2)).collect();
        let f_raw = st.forward_raw(f_u);
        let dt = stepper.default_dt();
        Self {
            stepper,
            st,
            v_samples: v.sample(grid),
            ksq,
            f_raw,
            dt,
        }
    }

    /// `e^{-itH₀} f` in `u`-samples.
    fn free_at(&self, t: f64) -> Vec<C64> {
        let coeffs: Vec<C64> = self
            .f_raw
            .iter()
            .zip(&self.ksq)
            .map(|(c, &k2)| c * (-C64::i() * (k2 * t)).exp())
            .collect();
        self.st.inverse_raw(&coeffs)
    }

    /// `W^{T,ε} f = f + i e^{iTH} B(T)` with
    /// `B' = -iHB + e^{-εt} V e^{-itH₀} f`, `B(0) = 0`.
    fn run(&self, f_u: &[C64], horizon: f64, eps: f64) -> Vec<C64> {
        let n_steps = (horizon / self.dt).ceil() as usize;
        let dt = horizon / n_steps as f64;
        let mut b = vec![C64::new(0.0, 0.0); f_u.len()];
        for m in 0..n_steps {
            let t_mid = (m as f64 + 0.5) * dt;
            let free = self.free_at(t_mid);
            let mut source: Vec<C64> = free
                .iter()
                .zip(&self.v_samples)
                .map(|(z, &vi)| z * ((-eps * t_mid).exp() * vi))
                .collect();
            // B(t+dt) = e^{-i dt H} B(t) + dt · e^{-i dt/2 H} g(t+dt/2)
            self.stepper.step(&mut b, dt);
            self.stepper.evolve_by(&mut source, dt / 2.0, dt);
            for (bi, si) in b.iter_mut().zip(&source) {
                *bi += si * dt;
            }
        }
        // e^{iTH} B(T), then W f = f + iJ.
        self.stepper.evolve_by(&mut b, -horizon, self.dt);
        f_u.iter().zip(&b).map(|(fi, bi)| fi + C64::i() * bi).collect()
    }

    fn run_extrapolated(&self, f_u: &[C64], horizon: f64, schedule: &[f64]) -> Vec<C64> {
        if schedule.len() == 1 {
            return self.run(f_u, horizon, schedule[0]);
        }
        let runs: Vec<Vec<C64>> = schedule
            .par_iter()
            .map(|&eps| self.run(f_u, horizon, eps))
            .collect();
        let w = lagrange_at_zero(schedule);
        let n = f_u.len();
        let mut out = vec![C64::new(0.0, 0.0); n];
        for (run, &wi) in runs.iter().zip(&w) {
            for (o, z) in out.iter_mut().zip(run) {
                *o += z * wi;
            }
        }
        out
    }
}

/// Cook's method for `W₊` with defect diagnostics.
///
/// `s_probes` are the intertwining times; an empty list skips that check
/// (saving the extra pipeline runs).
pub fn cook_wave_operator(
    grid: &Arc<RadialGrid>,
    v: &Potential,
    f: &WavePacket,
    horizon: f64,
    schedule: &[f64],
    s_probes: &[f64],
) -> Result<WaveOperatorResult> {
    let f_u = match f {
        WavePacket::Radial3 { u, .. } => u.clone(),
        _ => {
            return Err(ScatterError::Precondition(
                "Cook integration needs a 3D-radial packet".into(),
            ))
        }
    };
    let engine = CookEngine::new(grid, v, &f_u);
    let h = grid.spacing();

    // Integrand decay check: ‖V e^{-itH₀}f‖₂ must fall off like t^{-3/2}.
    let probe_ts: Vec<f64> = (0..12)
        .map(|i| horizon * (0.25 + 0.75 * i as f64 / 11.0))
        .collect();
    let samples: Vec<(f64, f64)> = probe_ts
        .iter()
        .map(|&t| {
            let free = engine.free_at(t);
            let val = (free
                .iter()
                .zip(&engine.v_samples)
                .map(|(z, &vi)| (z * vi).norm_sqr())
                .sum::<f64>()
                * 4.0
                * PI
                * h)
                .sqrt();
            (t, val.max(1e-300))
        })
        .collect();
    let ifit = fit_power_law(&samples, (probe_ts[0], horizon))?;
    if ifit.exponent < 1.2 {
        return Err(ScatterError::Horizon {
            fraction: ifit.exponent,
            limit: 1.2,
        });
    }
    // Tail bound ∫_T^∞ C t^{-p} dt with the fitted (C, p).
    let tail_estimate =
        ifit.prefactor * horizon.powf(1.0 - ifit.exponent) / (ifit.exponent - 1.0);

    let w_u = engine.run_extrapolated(&f_u, horizon, schedule);
    let w_packet = f.with_values(w_u.clone());
    let in_norms = f.norms();
    let isometry_defect = (w_packet.norms().l2 - in_norms.l2).abs();

    let mut intertwining_probes = Vec::new();
    for &s in s_probes {
        // e^{isH} (Wf)
        let mut lhs = w_u.clone();
        engine.stepper.evolve_by(&mut lhs, -s, engine.dt);
        // W (e^{isH₀} f)
        let shifted: Vec<C64> = {
            let coeffs: Vec<C64> = engine
                .f_raw
                .iter()
                .zip(&engine.ksq)
                .map(|(c, &k2)| c * (C64::i() * (k2 * s)).exp())
                .collect();
            engine.st.inverse_raw(&coeffs)
        };
        let sub_engine = CookEngine::new(grid, v, &shifted);
        let rhs = sub_engine.run_extrapolated(&shifted, horizon, schedule);
        let dist = (lhs
            .iter()
            .zip(&rhs)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            * 4.0
            * PI
            * h)
            .sqrt();
        intertwining_probes.push((s, dist));
    }
    let intertwining_defect = intertwining_probes
        .iter()
        .map(|&(_, d)| d)
        .fold(0.0, f64::max);

    Ok(WaveOperatorResult {
        output: Some(w_packet),
        input_norms: in_norms,
        horizon,
        epsilon_schedule: schedule.to_vec(),
        tail_estimate,
        integrand_exponent: ifit.exponent,
        isometry_defect,
        intertwining_probes,
        intertwining_defect,
    })
}

// ---------------------------------------------------------------------------
// Dyson terms (analytic time integrals per sine-mode pair)
// ---------------------------------------------------------------------------

/// Cached sine-space data for the Dyson terms of one `(grid, V)` pair.
pub struct DysonContext {
    grid: Arc<RadialGrid>,
    st: SineTransform,
    /// Multiplication by `V` conjugated into raw sine coefficients.
    v_raw: DMatrix<C64>,
    ksq: Vec<f64>,
}

impl DysonContext {
    pub fn new(grid: &Arc<RadialGrid>, v: &Potential) -> Self {
        let st = SineTransform::new(grid);
        let n = grid.len();
        let vs = v.sample(grid);
        let mut v_raw = DMatrix::zeros(n, n);
        let cols: Vec<Vec<C64>> = (0..n)
            .into_par_iter()
            .map(|j| {
                let st_local = SineTransform::new(grid);
                let mut e = vec![C64::new(0.0, 0.0); n];
                e[j] = C64::new(1.0, 0.0);
                let u = st_local.inverse_raw(&e);
                let vu: Vec<C64> = u.iter().zip(&vs).map(|(z, &vi)| z * vi).collect();
                st_local.forward_raw(&vu)
            })
            .collect();
        for (j, col) in cols.iter().enumerate() {
            for i in 0..n {
                v_raw[(i, j)] = col[i];
            }
        }
        let ksq = (1..=n).map(|m| st.frequency(m).powi(2)).collect();
        Self {
            grid: grid.clone(),
            st,
            v_raw,
            ksq,
        }
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    /// `∫₀^T e^{(iΔ - ε)t} dt`.
    fn g_t(delta: f64, eps: f64, horizon: f64) -> C64 {
        let a = C64::new(-eps, delta);
        if a.norm() < 1e-14 {
            return C64::from(horizon);
        }
        ((a * horizon).exp() - 1.0) / a
    }

    /// `W₁^{ε,T} f` (or `W₂^{ε,T} f` for `order = 2`).
    ///
    /// The time integrals of the regularized Duhamel expansion are evaluated
    /// in closed form mode-pair by mode-pair; for `order = 2` the coupled
    /// simplex limits are relaxed to independent horizons, an `O(e^{-εT})`
    /// modification.
    pub fn term(&self, f: &WavePacket, order: usize, horizon: f64, eps: f64) -> WavePacket {
        let f_u = f.values();
        let n = f_u.len();
        let f_raw = self.st.forward_raw(f_u);
        let out_raw: Vec<C64> = match order {
            1 => (0..n)
                .into_par_iter()
                .map(|m| {
                    let mut acc = C64::new(0.0, 0.0);
                    for mp in 0..n {
                        let delta = self.ksq[m] - self.ksq[mp];
                        acc += self.v_raw[(m, mp)] * Self::g_t(delta, eps, horizon) * f_raw[mp];
                    }
                    C64::i() * acc
                })
                .collect(),
            2 => {
                // C = V · (V ∘ G), output = -(G ∘ C) f̂.
                let mut vg = self.v_raw.clone();
                for mp in 0..n {
                    for mpp in 0..n {
                        vg[(mp, mpp)] *= Self::g_t(self.ksq[mp] - self.ksq[mpp], eps, horizon);
                    }
                }
                let c = &self.v_raw * vg;
                (0..n)
                    .into_par_iter()
                    .map(|m| {
                        let mut acc = C64::new(0.0, 0.0);
                        for mpp in 0..n {
                            acc += c[(m, mpp)]
                                * Self::g_t(self.ksq[m] - self.ksq[mpp], eps, horizon)
                                * f_raw[mpp];
                        }
                        -acc
                    })
                    .collect()
            }
            _ => panic!("Dyson terms beyond order 2 are unsupported"),
        };
        f.with_values(self.st.inverse_raw(&out_raw))
    }

    /// Richardson extrapolation of [`Self::term`] over an ε-schedule.
    pub fn term_extrapolated(
        &self,
        f: &WavePacket,
        order: usize,
        horizon: f64,
        schedule: &[f64],
    ) -> WavePacket {
        if schedule.len() == 1 {
            return self.term(f, order, horizon, schedule[0]);
        }
        let runs: Vec<WavePacket> = schedule
            .iter()
            .map(|&e| self.term(f, order, horizon, e))
            .collect();
        let w = lagrange_at_zero(schedule);
        let n = f.values().len();
        let mut out = vec![C64::new(0.0, 0.0); n];
        for (run, &wi) in runs.iter().zip(&w) {
            for (o, z) in out.iter_mut().zip(run.values()) {
                *o += z * wi;
            }
        }
        f.with_values(out)
    }
}

/// Convenience wrapper matching the operation signature: the `n`-th Dyson
/// term (`n ∈ {1, 2}`) at one regularization.
pub fn dyson_term(
    grid: &Arc<RadialGrid>,
    v: &Potential,
    f: &WavePacket,
    order: usize,
    horizon: f64,
    eps: f64,
) -> Result<WavePacket> {
    if !(order == 1 || order == 2) {
        return Err(ScatterError::Precondition(format!(
            "Dyson term order {order} unsupported (cost); use 1 or 2"
        )));
    }
    Ok(DysonContext::new(grid, v).term(f, order, horizon, eps))
}

// ---------------------------------------------------------------------------
// continuum first Dyson term (momentum representation)
// ---------------------------------------------------------------------------

/// The ε → 0 strong limit of the first Dyson term, evaluated in the
/// continuum radial momentum representation:
///
/// ```text
/// (W₁f)^(k) = -(2π)⁻³ · 2π ∫₀^∞ p² f̂(p) M(k,p) / (k² - p² + iε) dp,
/// M(k,p) = ∫_{-1}^{1} V̂(√(k²+p²-2kpμ)) dμ
/// ```
///
/// The singular factor is handled by principal-value subtraction with the
/// analytic closed form of `∫₀^P dp/(k²-p²+iε)`, so `eps = 0` is evaluated
/// directly (no schedule needed). This is the object the translation /
/// reflection representation must reproduce; the box-regularized
/// [`DysonContext`] terms carry the finite-horizon artifacts of the
/// discrete spectrum instead and are only comparable against
/// [`cook_wave_operator`] at matched `(ε, T)`.
pub fn w1_continuum(v: &Potential, f: &WavePacket, eps: f64) -> Result<WavePacket> {
    let (grid, u) = match f {
        WavePacket::Radial3 { grid, u } => (grid.clone(), u.clone()),
        _ => {
            return Err(ScatterError::Precondition(
                "momentum-representation W₁ needs a radial packet".into(),
            ))
        }
    };
    let h = grid.spacing();
    let nodes = grid.nodes().to_vec();
    // Radial transform of ψ: f̂(p) = (4π/p) Σ u_i sin(p r_i) h.
    let fhat = |p: f64| -> C64 {
        if p.abs() < 1e-9 {
            let s: C64 = u
                .iter()
                .zip(&nodes)
                .map(|(z, &r)| z * r)
                .sum();
            return s * (4.0 * PI * h);
        }
        let s: C64 = u
            .iter()
            .zip(&nodes)
            .map(|(z, &r)| z * (p * r).sin())
            .sum();
        s * (4.0 * PI * h / p)
    };
    // Angular average of V̂ between shells k and p.
    let m_kp: Box<dyn Fn(f64, f64) -> f64 + Sync> = match &v.kind {
        PotentialKind::Gaussian { amplitude, scale } => {
            let (a, w) = (*amplitude, *scale);
            Box::new(move |k: f64, p: f64| {
                let c = a * PI.powf(1.5) * w.powi(3);
                let arg = w * w * k * p / 2.0;
                let ratio = if arg.abs() < 1e-8 {
                    1.0 + arg * arg / 6.0
                } else {
                    arg.sinh() / arg
                };
                c * (-(w * w) * (k * k + p * p) / 4.0).exp() * 2.0 * ratio
            })
        }
        _ => {
            let vc = v.clone();
            let (mu_x, mu_w) = gauss_legendre_on(48, -1.0, 1.0);
            Box::new(move |k: f64, p: f64| {
                mu_x.iter()
                    .zip(&mu_w)
                    .map(|(&mu, &wm)| {
                        let q = (k * k + p * p - 2.0 * k * p * mu).max(0.0).sqrt();
                        potential_fourier(&vc, q) * wm
                    })
                    .sum()
            })
        }
    };

    let p_max = 9.0;
    let k_max = 8.0;
    // k-nodes for the output inversion (Gauss-Legendre panels).
    let mut k_nodes = Vec::new();
    let mut k_weights = Vec::new();
    let mut left: f64 = 1e-6;
    while left < k_max {
        let right = (left + 0.05).min(k_max);
        let (xs, ws) = gauss_legendre_on(10, left, right);
        k_nodes.extend(xs);
        k_weights.extend(ws);
        left = right;
    }
    // p-panels for the subtracted integral.
    let mut p_panels = Vec::new();
    let mut pl: f64 = 0.0;
    while pl < p_max {
        let pr = (pl + 0.1).min(p_max);
        p_panels.push(gauss_legendre_on(12, pl, pr));
        pl = pr;
    }

    let what: Vec<C64> = k_nodes
        .par_iter()
        .map(|&k| {
            let g = |p: f64| -> C64 { fhat(p) * (p * p * m_kp(k, p)) };
            let gk = g(k);
            // Analytic ∫₀^P dp/(k² - p² + iε) on the +iε branch.
            let j = if eps > 0.0 {
                let kt = {
                    let mut z = C64::new(k * k, eps).sqrt();
                    if z.im < 0.0 {
                        z = -z;
                    }
                    z
                };
                ((kt + p_max) / (kt - p_max)).ln() / (kt * 2.0)
            } else {
                // +iε branch: ln(k̃ - P) picks up +iπ for P > k, so J carries -iπ.
                C64::new(((k + p_max) / (k - p_max).abs()).ln(), -PI) / (2.0 * k)
            };
            let mut acc = gk * j;
            for (xs, ws) in &p_panels {
                for (&p, &w) in xs.iter().zip(ws) {
                    let denom = C64::new(k * k - p * p, eps);
                    acc += (g(p) - gk) / denom * w;
                }
            }
            -acc * (2.0 * PI) * (2.0 * PI).powi(-3)
        })
        .collect();

    // Inverse radial transform back onto the grid: ψ(r) = (2π)⁻³ 4π/r ∫ k sin(kr) Ŵ dk.
    let out: Vec<C64> = nodes
        .par_iter()
        .map(|&r| {
            let mut acc = C64::new(0.0, 0.0);
            for ((&k, &wk), wv) in k_nodes.iter().zip(&k_weights).zip(&what) {
                acc += wv * (k * (k * r).sin() * wk);
            }
            // ψ·r = u output.
            acc * (4.0 * PI * (2.0 * PI).powi(-3))
        })
        .collect();
    Ok(WavePacket::Radial3 { grid, u: out })
}

// ---------------------------------------------------------------------------
// structure function
// ---------------------------------------------------------------------------

/// Sampled structure function `L(r)` of the first Dyson term (radial
/// potentials make it independent of the direction ω).
#[derive(Debug, Clone, Serialize)]
pub struct StructureFunction {
    /// Symmetric sample abscissae.
    pub r_samples: Vec<f64>,
    #[serde(skip)]
    pub values: Vec<C64>,
    /// `∫_{S²}∫_ℝ |κ L| dr dω = 4π |κ| ∫|L| dr`.
    pub l1_norm: f64,
    pub l2_norm: f64,
    /// Calibration constant absorbed into the representation.
    pub kappa: (f64, f64),
}

impl StructureFunction {
    pub fn kappa_c(&self) -> C64 {
        C64::new(self.kappa.0, self.kappa.1)
    }

    /// Cubic (Catmull-Rom) interpolation of `L` at `r`; zero outside the
    /// sampled range.
    pub fn eval(&self, r: f64) -> C64 {
        let n = self.r_samples.len();
        let lo = self.r_samples[0];
        let dr = self.r_samples[1] - self.r_samples[0];
        let x = (r - lo) / dr;
        if x < 1.0 || x > (n - 3) as f64 {
            if r < lo || r > self.r_samples[n - 1] {
                return C64::new(0.0, 0.0);
            }
            // linear near the edges
            let j = (x.floor() as usize).min(n - 2);
            let t = x - j as f64;
            return self.values[j] * (1.0 - t) + self.values[j + 1] * t;
        }
        let j = x.floor() as usize;
        let t = x - j as f64;
        let (p0, p1, p2, p3) = (
            self.values[j - 1],
            self.values[j],
            self.values[j + 1],
            self.values[j + 2],
        );
        let a = (p2 - p0) * 0.5;
        let b = p0 - p1 * 2.5 + p2 * 2.0 - p3 * 0.5;
        let c = (p3 - p0) * 0.5 + (p1 - p2) * 1.5;
        p1 + (a + (b + c * t) * t) * t
    }

    /// Scale κ (and the norms that carry it).
    pub fn with_kappa(mut self, kappa: C64) -> Self {
        let old = self.kappa_c().norm();
        self.kappa = (kappa.re, kappa.im);
        let ratio = kappa.norm() / old.max(1e-300);
        self.l1_norm *= ratio;
        self.l2_norm *= ratio;
        self
    }
}

/// Radial 3D Fourier transform `V̂(s) = (4π/s)∫₀^∞ V(r) sin(sr) r dr`
/// (closed form for Gaussians, quadrature otherwise).
pub fn potential_fourier(v: &Potential, s: f64) -> f64 {
    match &v.kind {
        PotentialKind::Gaussian { amplitude, scale } => {
            amplitude * PI.powf(1.5) * scale.powi(3) * (-(scale * scale) * s * s / 4.0).exp()
        }
        _ => {
            if s.abs() < 1e-9 {
                // 4π ∫ V r² dr
                let (xs, ws) = gauss_legendre_on(4096, 0.0, 80.0);
                return 4.0
                    * PI
                    * xs.iter()
                        .zip(&ws)
                        .map(|(&r, &w)| v.eval(r) * r * r * w)
                        .sum::<f64>();
            }
            let res = oscillatory_integral(|r| v.eval(r) * r, s, 0.0, 80.0)
                .map(|o| o.value.im)
                .unwrap_or(0.0);
            4.0 * PI / s * res
        }
    }
}

/// Sample `L(r) = ∫₀^∞ V̂(s) e^{irs/2} s ds` on a symmetric `r`-window.
///
/// `κ` is initialized to 1 and fixed later by [`calibrate_kappa`].
pub fn structure_l(v: &Potential, r_extent: f64, n_samples: usize) -> Result<StructureFunction> {
    let s_trunc = match &v.kind {
        PotentialKind::Gaussian { scale, .. } => 14.0 / scale,
        _ => 40.0,
    };
    let dr = 2.0 * r_extent / (n_samples - 1) as f64;
    let r_samples: Vec<f64> = (0..n_samples).map(|i| -r_extent + i as f64 * dr).collect();
    let values: Vec<C64> = {
        let results: Vec<Result<C64>> = r_samples
            .par_iter()
            .map(|&r| {
                oscillatory_integral(|s| potential_fourier(v, s), r / 2.0, 1.0, s_trunc)
                    .map(|o| o.value)
            })
            .collect();
        let mut out = Vec::with_capacity(n_samples);
        for r in results {
            out.push(r?);
        }
        out
    };
    let l1 = 4.0 * PI * values.iter().map(|z| z.norm()).sum::<f64>() * dr;
    let l2 = (4.0 * PI * values.iter().map(|z| z.norm_sqr()).sum::<f64>() * dr).sqrt();
    Ok(StructureFunction {
        r_samples,
        values,
        l1_norm: l1,
        l2_norm: l2,
        kappa: (1.0, 0.0),
    })
}

/// `(W₁f)(x) = κ ∫₀^∞∫_{S²} L(r - 2ω·x) f(x - rω) dr dω` for radial `f`
/// (equivalently, through the reflections `S_ω x = x - 2(ω·x)ω`, a weighted
/// average of translations and reflections of `f`).
pub fn apply_w1_structure(
    l: &StructureFunction,
    f: &WavePacket,
    out_grid: &Arc<RadialGrid>,
) -> Result<WavePacket> {
    let (f_grid, f_u) = match f {
        WavePacket::Radial3 { grid, u } => (grid.clone(), u.clone()),
        _ => {
            return Err(ScatterError::Precondition(
                "structure application needs a radial packet".into(),
            ))
        }
    };
    let r_support = f_grid.r_max();
    let t_max = out_grid.r_max();
    let needed = 2.0 * t_max + r_support;
    let have = l.r_samples.last().copied().unwrap_or(0.0);
    if have < r_support || -l.r_samples[0] < needed - r_support {
        return Err(ScatterError::GridTooSmall(format!(
            "structure function sampled on [{:.1}, {:.1}] but the application needs [-{:.1}, {:.1}]",
            l.r_samples[0], have, needed, r_support
        )));
    }
    // Interpolate ψ_f = u/r from the packet samples (clamped to 0 outside).
    let fh = f_grid.spacing();
    let psi_at = move |rr: f64| -> C64 {
        if rr >= r_support {
            return C64::new(0.0, 0.0);
        }
        let x = (rr / fh - 0.5).max(0.0);
        let j = (x.floor() as usize).min(f_grid.len() - 2);
        let t = x - j as f64;
        let a = f_u[j] / f_grid.node(j);
        let b = f_u[j + 1] / f_grid.node(j + 1);
        a * (1.0 - t) + b * t
    };

    let (mu_x, mu_w) = gauss_legendre_on(64, -1.0, 1.0);
    let r_panel = 0.25;
    let kappa = l.kappa_c();
    let out: Vec<C64> = out_grid
        .nodes()
        .par_iter()
        .map(|&t| {
            let mut acc = C64::new(0.0, 0.0);
            for (&mu, &wm) in mu_x.iter().zip(&mu_w) {
                // ∫₀^{R} L(r - 2tμ) ψ_f(√(t² + r² - 2trμ)) dr
                let r_hi = t + r_support;
                let mut left = 0.0;
                while left < r_hi {
                    let right = (left + r_panel).min(r_hi);
                    let (rs, ws) = gauss_legendre_on(8, left, right);
                    for (&r, &w) in rs.iter().zip(&ws) {
                        let dist2 = t * t + r * r - 2.0 * t * r * mu;
                        let dist = dist2.max(0.0).sqrt();
                        let lv = l.eval(r - 2.0 * t * mu);
                        if lv.norm_sqr() > 0.0 {
                            acc += lv * psi_at(dist) * (w * wm);
                        }
                    }
                    left = right;
                }
            }
            // 2π from the azimuth; multiply by t for u-space output.
            kappa * acc * (2.0 * PI * t)
        })
        .collect();
    Ok(WavePacket::Radial3 {
        grid: out_grid.clone(),
        u: out,
    })
}

/// Least-squares complex κ aligning the structure route with a reference
/// `W₁ f` computed independently (the Dyson route).
pub fn calibrate_kappa(reference: &WavePacket, structure_out: &WavePacket) -> C64 {
    let num: C64 = reference
        .values()
        .iter()
        .zip(structure_out.values())
        .map(|(a, b)| a * b.conj())
        .sum();
    let den: f64 = structure_out.values().iter().map(|z| z.norm_sqr()).sum();
    num / den.max(1e-300)
}

/// Relative `L²` difference between two packets on the same grid.
pub fn relative_l2(a: &WavePacket, b: &WavePacket) -> f64 {
    a.l2_distance(b) / b.norms().l2.max(1e-300)
}

// ---------------------------------------------------------------------------
// L^p boundedness probe
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct LpProbeRow {
    pub p: f64,
    pub ratio: f64,
    pub family_size: usize,
}

/// Max over a packet family of `‖Op f‖_p / ‖f‖_p` for each requested `p`
/// (`p ∈ {1, 2, ∞}` supported; `p = ∞` encoded as `f64::INFINITY`).
pub fn lp_bound_probe<F>(
    op: F,
    p_list: &[f64],
    family: &[WavePacket],
) -> Result<Vec<LpProbeRow>>
where
    F: Fn(&WavePacket) -> Result<WavePacket> + Sync,
{
    let outputs: Vec<Result<WavePacket>> = family.par_iter().map(&op).collect();
    let mut outs = Vec::with_capacity(outputs.len());
    for o in outputs {
        outs.push(o?);
    }
    let pick = |n: &PacketNorms, p: f64| -> f64 {
        if p == 1.0 {
            n.l1
        } else if p == 2.0 {
            n.l2
        } else {
            n.linf
        }
    };
    Ok(p_list
        .iter()
        .map(|&p| {
            let ratio = family
                .iter()
                .zip(&outs)
                .map(|(f, g)| pick(&g.norms(), p) / pick(&f.norms(), p).max(1e-300))
                .fold(0.0, f64::max);
            LpProbeRow {
                p,
                ratio,
                family_size: family.len(),
            }
        })
        .collect())
}

/// Seeded radial packet family for the probes.
pub fn radial_packet_family(
    grid: &Arc<RadialGrid>,
    seed: u64,
    count: usize,
) -> Vec<WavePacket> {
    use rand::Rng;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let w: f64 = 0.8 + 2.2 * rng.random::<f64>();
            let r0: f64 = 6.0 * rng.random::<f64>();
            let k0: f64 = -1.0 + 2.0 * rng.random::<f64>();
            WavePacket::radial_from_psi(grid, move |r| {
                num_complex::Complex::from_polar(
                    (-(r - r0) * (r - r0) / (w * w)).exp(),
                    k0 * r,
                )
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Dawson function `D(x) = e^{-x²}∫₀^x e^{t²}dt` for the closed-form
    /// structure-function oracle (RK4 on D' = 1 - 2xD for small x, an
    /// asymptotic series beyond).
    fn dawson(x: f64) -> f64 {
        let ax = x.abs();
        let val = if ax <= 12.0 {
            let n = (ax * 20000.0).ceil().max(1.0) as usize;
            let h = ax / n as f64;
            let mut d = 0.0;
            let mut t = 0.0;
            for _ in 0..n {
                let f = |t: f64, d: f64| 1.0 - 2.0 * t * d;
                let k1 = f(t, d);
                let k2 = f(t + h / 2.0, d + h / 2.0 * k1);
                let k3 = f(t + h / 2.0, d + h / 2.0 * k2);
                let k4 = f(t + h, d + h * k3);
                d += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                t += h;
            }
            d
        } else {
            let ix = 1.0 / ax;
            let ix2 = ix * ix;
            0.5 * ix
                * (1.0
                    + 0.5
                        * ix2
                        * (1.0
                            + 1.5
                                * ix2
                                * (1.0 + 2.5 * ix2 * (1.0 + 3.5 * ix2 * (1.0 + 4.5 * ix2)))))
        };
        if x < 0.0 {
            -val
        } else {
            val
        }
    }

    /// Closed form for the Gaussian structure function:
    /// `L(r) = Aπ^{3/2}w³ σ⁻²[…]` reduces for w = 1 to
    /// `Aπ^{3/2}(2 - 4bD(b) + 2i√π b e^{-b²})`, `b = r/2`.
    fn gaussian_l_oracle(a: f64, r: f64) -> C64 {
        let b = r / 2.0;
        let re = 2.0 - 4.0 * b * dawson(b);
        let im = 2.0 * PI.sqrt() * b * (-b * b).exp();
        C64::new(re, im) * (a * PI.powf(1.5))
    }

    #[test]
    fn dawson_sanity() {
        // D(1) = 0.5380795069..., D'(0) = 1.
        assert!((dawson(1.0) - 0.5380795069127684).abs() < 1e-9);
        assert!((dawson(0.01) - 0.01).abs() < 1e-6);
        assert!((dawson(8.0) - (0.5 / 8.0 + 0.25 / 512.0)).abs() < 1e-4);
    }

    #[test]
    fn structure_function_matches_closed_form() {
        let v = Potential::gaussian(1.0, 1.0);
        let l = structure_l(&v, 30.0, 1201).unwrap();
        let mut worst = 0.0_f64;
        for (i, &r) in l.r_samples.iter().enumerate() {
            let exact = gaussian_l_oracle(1.0, r);
            worst = worst.max((l.values[i] - exact).norm());
        }
        assert!(worst < 1e-8, "structure function error {worst}");
        // L(0) = 2Aπ^{3/2}.
        let mid = l.values[l.r_samples.len() / 2];
        assert!((mid.re - 2.0 * PI.powf(1.5)).abs() < 1e-8);
        // Zero potential → identically zero.
        let lz = structure_l(&Potential::zero(), 10.0, 101).unwrap();
        assert!(lz.l1_norm == 0.0 && lz.l2_norm == 0.0);
    }

    #[test]
    fn structure_l2_bound_across_gaussian_family() {
        // ‖L‖_{L²_{r,ω}} ≲ ‖V‖_{L²}: the ratio stays bounded across the family.
        let mut ratios = Vec::new();
        for &a in &[0.25, 0.5, 1.0] {
            for &w in &[0.5, 1.0, 2.0] {
                let v = Potential::gaussian(a, w);
                let l = structure_l(&v, 40.0, 1601).unwrap();
                let v_l2 = crate::potentials::lp_norm(&v, 2.0).unwrap();
                ratios.push(l.l2_norm / v_l2);
            }
        }
        let max = ratios.iter().cloned().fold(0.0, f64::max);
        let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(
            max / min < 10.0,
            "L² ratio not uniformly bounded: {ratios:?}"
        );
    }

    #[test]
    fn dyson_term_zero_potential_and_linearity() {
        let grid = RadialGrid::new(40.0, 256);
        let f = WavePacket::radial_from_psi(&grid, |r| C64::new((-r * r / 4.0).exp(), 0.0));
        let zero_ctx = DysonContext::new(&grid, &Potential::zero());
        let w1 = zero_ctx.term(&f, 1, 60.0, 0.1);
        assert!(w1.norms().l2 < 1e-14);
        // Linearity in the potential amplitude.
        let a_ctx = DysonContext::new(&grid, &Potential::gaussian(0.3, 1.0));
        let b_ctx = DysonContext::new(&grid, &Potential::gaussian(0.6, 1.0));
        let wa = a_ctx.term(&f, 1, 60.0, 0.1);
        let wb = b_ctx.term(&f, 1, 60.0, 0.1);
        let scaled = wa.with_values(wa.values().iter().map(|z| z * 2.0).collect());
        assert!(relative_l2(&scaled, &wb) < 1e-10);
        // Linearity in f.
        let g = WavePacket::radial_from_psi(&grid, |r| {
            C64::new(0.0, (-(r - 3.0) * (r - 3.0) / 2.0).exp())
        });
        let sum = f.with_values(
            f.values()
                .iter()
                .zip(g.values())
                .map(|(x, y)| x + y * 0.7)
                .collect(),
        );
        let w_sum = a_ctx.term(&sum, 1, 60.0, 0.1);
        let w_g = a_ctx.term(&g, 1, 60.0, 0.1);
        let combo = wa.with_values(
            wa.values()
                .iter()
                .zip(w_g.values())
                .map(|(x, y)| x + y * 0.7)
                .collect(),
        );
        assert!(relative_l2(&w_sum, &combo) < 1e-10);
    }

    #[test]
    fn cook_zero_potential_is_identity() {
        let grid = RadialGrid::new(60.0, 512);
        let f = WavePacket::radial_from_psi(&grid, |r| C64::new((-r * r).exp(), 0.0));
        let res = cook_wave_operator(
            &grid,
            &Potential::zero(),
            &f,
            20.0,
            &[0.2, 0.1],
            &[0.5],
        );
        // V = 0 fails the integrand-decay fit (all zeros) — accept either a
        // clean identity or the degenerate-fit error path.
        match res {
            Ok(r) => {
                assert!(r.isometry_defect < 1e-12);
                assert!(relative_l2(r.output.as_ref().unwrap(), &f) < 1e-12);
            }
            Err(ScatterError::NonPositiveSample { .. }) | Err(ScatterError::Horizon { .. }) => {}
            Err(e) => panic!("unexpected error {e}"),
        }
    }

    #[test]
    fn dyson_partial_sums_approximate_cook_at_cubic_order() {
        // ‖W - (I + W₁ + W₂)‖ = O(A³): the log₂-slope across A ∈ {0.2, 0.4}
        // must be ≥ 2.7.
        let grid = RadialGrid::new(120.0, 2048);
        let f = WavePacket::radial_from_psi(&grid, |r| C64::new((-r * r / 4.0).exp(), 0.0));
        let horizon = 40.0;
        let schedule = [0.2, 0.1, 0.05];
        let mut residuals = Vec::new();
        for &a in &[0.2, 0.4] {
            let v = Potential::gaussian(a, 1.0);
            let cook = cook_wave_operator(&grid, &v, &f, horizon, &schedule, &[]).unwrap();
            let ctx = DysonContext::new(&grid, &v);
            let w1 = ctx.term_extrapolated(&f, 1, horizon, &schedule);
            let w2 = ctx.term_extrapolated(&f, 2, horizon, &schedule);
            let w_out = cook.output.unwrap();
            let resid: f64 = {
                let vals: Vec<C64> = w_out
                    .values()
                    .iter()
                    .zip(f.values())
                    .zip(w1.values().iter().zip(w2.values()))
                    .map(|((w, f0), (a1, a2))| w - f0 - a1 - a2)
                    .collect();
                f.with_values(vals).norms().l2
            };
            residuals.push(resid);
        }
        let slope = (residuals[1] / residuals[0]).log2();
        assert!(
            slope >= 2.7,
            "cubic-order slope {slope}, residuals {residuals:?}"
        );
    }

    #[test]
    fn w1_structure_cross_check_with_kappa_calibration() {
        // Calibrate κ on one (V, f) pair, then check agreement on disjoint
        // pairs: the module's central dual-construction test.
        let grid = RadialGrid::new(48.0, 768);

        let cal_v = Potential::gaussian(0.5, 1.0);
        let cal_f =
            WavePacket::radial_from_psi(&grid, |r| C64::new((-r * r / 2.25).exp(), 0.0));
        let dyson_ref = w1_continuum(&cal_v, &cal_f, 0.0).unwrap();
        let l_cal = structure_l(&cal_v, 2.0 * 48.0 + 50.0, 4801).unwrap();
        let raw = apply_w1_structure(&l_cal, &cal_f, &grid).unwrap();
        let kappa = calibrate_kappa(&dyson_ref, &raw);
        let mismatch = relative_l2(
            &raw.with_values(raw.values().iter().map(|z| z * kappa).collect()),
            &dyson_ref,
        );
        assert!(mismatch <= 5e-2, "calibration-pair mismatch {mismatch}");

        // Disjoint pairs share the same κ.
        let pairs: Vec<(Potential, WavePacket)> = vec![
            (
                Potential::gaussian(0.3, 1.2),
                WavePacket::radial_from_psi(&grid, |r| C64::new((-r * r / 4.0).exp(), 0.0)),
            ),
            (
                Potential::gaussian(0.7, 0.8),
                WavePacket::radial_from_psi(&grid, |r| {
                    C64::new((-(r - 1.0) * (r - 1.0) / 3.0).exp(), 0.0)
                }),
            ),
            (
                Potential::gaussian(0.5, 1.5),
                WavePacket::radial_from_psi(&grid, |r| {
                    C64::new((-r * r / 2.0).exp(), 0.3 * (-r * r / 5.0).exp())
                }),
            ),
        ];
        for (i, (v, f)) in pairs.iter().enumerate() {
            let dyson_i = w1_continuum(v, f, 0.0).unwrap();
            let l_i = structure_l(v, 2.0 * 48.0 + 50.0, 4801).unwrap().with_kappa(kappa);
            let struct_i = apply_w1_structure(&l_i, f, &grid).unwrap();
            let rel = relative_l2(&struct_i, &dyson_i);
            assert!(rel <= 5e-2, "pair {i}: relative L² difference {rel}");
        }

        // κ is reproducible from an unrelated pair to 1%.
        let alt_v = Potential::gaussian(0.4, 1.1);
        let alt_f = WavePacket::radial_from_psi(&grid, |r| {
            C64::new((-(r - 0.5) * (r - 0.5) / 2.0).exp(), 0.0)
        });
        let dyson_alt = w1_continuum(&alt_v, &alt_f, 0.0).unwrap();
        let l_alt = structure_l(&alt_v, 2.0 * 48.0 + 50.0, 4801).unwrap();
        let raw_alt = apply_w1_structure(&l_alt, &alt_f, &grid).unwrap();
        let kappa_alt = calibrate_kappa(&dyson_alt, &raw_alt);
        assert!(
            (kappa_alt - kappa).norm() <= 0.01 * kappa.norm(),
            "κ drift: {kappa} vs {kappa_alt}"
        );
    }

    #[test]
    fn w1_lp_bound_by_structure_norm() {
        // ‖W₁ f‖_p ≤ ‖L‖ ‖f‖_p for p ∈ {1, 2, ∞} on a random family.
        let grid = RadialGrid::new(48.0, 768);
        let v = Potential::gaussian(0.5, 1.0);
        let l = structure_l(&v, 2.0 * 48.0 + 50.0, 4801).unwrap();
        // Use the Dyson route for W₁ and the structure norm ‖L‖₁ with the
        // κ that matches the two representations.
        let f0 = WavePacket::radial_from_psi(&grid, |r| C64::new((-r * r / 2.0).exp(), 0.0));
        let d0 = w1_continuum(&v, &f0, 0.0).unwrap();
        let raw0 = apply_w1_structure(&l, &f0, &grid).unwrap();
        let kappa = calibrate_kappa(&d0, &raw0);
        let l = l.with_kappa(kappa);

        let family = radial_packet_family(&grid, 11, 20);
        let rows = lp_bound_probe(
            |f| w1_continuum(&v, f, 0.0),
            &[1.0, 2.0, f64::INFINITY],
            &family,
        )
        .unwrap();
        for row in &rows {
            assert!(
                row.ratio <= l.l1_norm * 1.05,
                "p = {}: ratio {} exceeds ‖L‖ = {}",
                row.p,
                row.ratio,
                l.l1_norm
            );
        }
        // Identity operator has every ratio 1.
        let id_rows =
            lp_bound_probe(|f| Ok(f.clone()), &[1.0, 2.0, f64::INFINITY], &family).unwrap();
        for row in &id_rows {
            assert!((row.ratio - 1.0).abs() < 1e-12);
        }
    }
}
