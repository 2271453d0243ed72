//! Perturbed Schrödinger evolution `e^{-itH}` by Strang split-step
//! integration in the radial reduction, bound-state projection, decay
//! exponent measurement for regular versus zero-energy-resonant potentials,
//! and the small-data mass-critical NLS fixed point on the line.

use std::sync::Arc;

use serde::Serialize;

use crate::birman::{radial_hamiltonian_tridiag, zero_energy_report, ZeroEnergyStatus};
use crate::error::{Result, ScatterError};
use crate::freefield::WavePacket;
use crate::linalg;
use crate::numerics::{fit_power_law, LineFourier, LineGrid, PowerLawFit, RadialGrid, SineTransform};
use crate::potentials::Potential;
use crate::C64;

const PI: f64 = std::f64::consts::PI;

/// Strang split-step propagator for `H = -d²/dr² + V` on `u = rψ`
/// (Dirichlet sine basis). Each step is exactly unitary.
pub struct SplitStepper {
    grid: Arc<RadialGrid>,
    st: SineTransform,
    v: Vec<f64>,
}

impl SplitStepper {
    pub fn new(grid: &Arc<RadialGrid>, v: &Potential) -> Self {
        Self {
            grid: grid.clone(),
            st: SineTransform::new(grid),
            v: v.sample(grid),
        }
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    /// Admissible step size: `dt ≤ 0.01 / max(1, ‖V‖_∞)`.
    pub fn default_dt(&self) -> f64 {
        let sup = self.v.iter().fold(0.0_f64, |m, &x| m.max(x.abs()));
        0.01 / sup.max(1.0)
    }

    /// One Strang step `u ← e^{-i dt H} u` (negative `dt` runs backwards).
    pub fn step(&self, u: &mut Vec<C64>, dt: f64) {
        let half = dt / 2.0;
        for (ui, &vi) in u.iter_mut().zip(&self.v) {
            *ui *= (-C64::i() * (vi * half)).exp();
        }
        *u = self
            .st
            .apply_multiplier(u, |k| (-C64::i() * (k * k * dt)).exp());
        for (ui, &vi) in u.iter_mut().zip(&self.v) {
            *ui *= (-C64::i() * (vi * half)).exp();
        }
    }

    /// Evolve by a signed duration with steps capped at `dt_max`.
    pub fn evolve_by(&self, u: &mut Vec<C64>, duration: f64, dt_max: f64) {
        if duration == 0.0 {
            return;
        }
        let n_steps = (duration.abs() / dt_max).ceil().max(1.0) as usize;
        let dt = duration / n_steps as f64;
        for _ in 0..n_steps {
            self.step(u, dt);
        }
    }
}

/// Discrete bound states of the radial Hamiltonian: eigenvalues below
/// `-1e-6` with their normalized `u`-space eigenvectors.
pub fn bound_states(grid: &RadialGrid, v: &Potential) -> Vec<(f64, Vec<f64>)> {
    let (diag, off) = radial_hamiltonian_tridiag(grid, v);
    linalg::tridiag_eigenvalues_below(&diag, &off, -1e-6)
        .into_iter()
        .map(|ev| (ev, linalg::tridiag_eigenvector(&diag, &off, ev)))
        .collect()
}

/// Remove the projection of `u` onto the listed (orthonormal) bound states.
pub fn project_off_bound_states(u: &mut [C64], states: &[(f64, Vec<f64>)]) {
    for (_, b) in states {
        let dot: C64 = u.iter().zip(b.iter()).map(|(ui, &bi)| ui * bi).sum();
        for (ui, &bi) in u.iter_mut().zip(b.iter()) {
            *ui -= dot * bi;
        }
    }
}

/// One evolution run with per-time norms and the sup-norm decay fit.
#[derive(Debug, Clone, Serialize)]
pub struct EvolutionRun {
    pub times: Vec<f64>,
    pub sup_norms: Vec<f64>,
    pub l2_norms: Vec<f64>,
    pub projected_bound_states: usize,
    pub fit: PowerLawFit,
    /// Largest boundary-mass fraction seen at any sample.
    pub max_boundary_fraction: f64,
}

/// Evolve `f` under `e^{-itH}` and record `‖ψ(t)‖_∞`, `‖ψ(t)‖₂` at the
/// sample times; optionally project `f` off the discrete bound states
/// first. The sup-norm decay is fitted over `fit_window`.
///
/// Boundary-reflection mass above 1e-4 of the total raises
/// [`ScatterError::Horizon`] (enlarge `r_max`).
pub fn evolve(
    grid: &Arc<RadialGrid>,
    v: &Potential,
    f: &WavePacket,
    t_list: &[f64],
    project: bool,
    fit_window: (f64, f64),
) -> Result<EvolutionRun> {
    let mut u = match f {
        WavePacket::Radial3 { u, .. } => u.clone(),
        _ => {
            return Err(ScatterError::Precondition(
                "radial packet required for the 3D evolution".into(),
            ))
        }
    };
    let states = if project {
        bound_states(grid, v)
    } else {
        Vec::new()
    };
    project_off_bound_states(&mut u, &states);

    let stepper = SplitStepper::new(grid, v);
    let dt = stepper.default_dt();
    let nodes = grid.nodes();
    let h = grid.spacing();
    let mut t_now = 0.0;
    let mut times = Vec::new();
    let mut sup_norms = Vec::new();
    let mut l2_norms = Vec::new();
    let mut max_boundary_fraction = 0.0_f64;
    for &t in t_list {
        assert!(t >= t_now, "sample times must be nondecreasing");
        stepper.evolve_by(&mut u, t - t_now, dt);
        t_now = t;
        let sup = u
            .iter()
            .zip(nodes)
            .map(|(z, &r)| z.norm() / r)
            .fold(0.0, f64::max);
        let l2 = (4.0 * PI * u.iter().map(|z| z.norm_sqr()).sum::<f64>() * h).sqrt();
        let edge = (grid.len() / 20).max(1);
        let total: f64 = u.iter().map(|z| z.norm_sqr()).sum();
        let frac = if total > 0.0 {
            u[grid.len() - edge..]
                .iter()
                .map(|z| z.norm_sqr())
                .sum::<f64>()
                / total
        } else {
            0.0
        };
        max_boundary_fraction = max_boundary_fraction.max(frac);
        if frac > 1e-4 {
            return Err(ScatterError::Horizon {
                fraction: frac,
                limit: 1e-4,
            });
        }
        times.push(t);
        sup_norms.push(sup);
        l2_norms.push(l2);
    }
    let samples: Vec<(f64, f64)> = times.iter().cloned().zip(sup_norms.iter().cloned()).collect();
    let fit = fit_power_law(&samples, fit_window)?;
    Ok(EvolutionRun {
        times,
        sup_norms,
        l2_norms,
        projected_bound_states: states.len(),
        fit,
        max_boundary_fraction,
    })
}

/// Outcome of the regular-vs-resonant decay comparison.
#[derive(Debug, Clone, Serialize)]
pub struct DecayComparison {
    pub regular: PowerLawFit,
    pub resonant: PowerLawFit,
    /// `regular.exponent - resonant.exponent` (≈ 1 when a whole power of t
    /// is lost to the resonance).
    pub exponent_gap: f64,
    pub status: ComparisonStatus,
    /// Exploratory: early-window exponent for data orthogonalized against
    /// the resonance profile (reported, not asserted).
    pub orthogonal_transient_exponent: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ComparisonStatus {
    Conclusive,
    Indeterminate,
}

/// Family-envelope decay: per time, the max over the family of
/// `‖e^{itH}P_c f‖_∞ / ‖f‖₁`. Regular potentials decay uniformly at the
/// free rate, so the envelope fits ~ t^{-3/2}; a zero-energy resonance
/// feeds a channel decaying a full power slower, which dominates the
/// envelope.
fn family_envelope(
    grid: &Arc<RadialGrid>,
    v: &Potential,
    family: &[WavePacket],
    t_list: &[f64],
    fit_window: (f64, f64),
) -> Result<(crate::numerics::PowerLawFit, Vec<f64>)> {
    let mut envelope = vec![0.0_f64; t_list.len()];
    for f in family {
        let l1 = f.norms().l1;
        let run = evolve(grid, v, f, t_list, true, fit_window)?;
        for (e, s) in envelope.iter_mut().zip(&run.sup_norms) {
            *e = e.max(s / l1);
        }
    }
    let samples: Vec<(f64, f64)> = t_list.iter().cloned().zip(envelope.iter().cloned()).collect();
    Ok((fit_power_law(&samples, fit_window)?, envelope))
}

/// Fit the family-envelope decay exponents for a zero-regular and a
/// resonant potential on the same packet family and report the exponent
/// gap. The regularity of both inputs is checked through a coarse
/// refinement screen.
pub fn decay_comparison(
    grid: &Arc<RadialGrid>,
    regular_v: &Potential,
    resonant_v: &Potential,
    f_family: &[WavePacket],
    t_list: &[f64],
    fit_window: (f64, f64),
) -> Result<DecayComparison> {
    if f_family.is_empty() {
        return Err(ScatterError::Precondition("empty packet family".into()));
    }
    let screen_levels = [96, 192, 384];
    let reg_report = zero_energy_report(regular_v, grid.r_max().min(60.0), &screen_levels)?;
    if reg_report.status != ZeroEnergyStatus::Regular {
        return Err(ScatterError::Precondition(
            "regular_v failed the zero-energy regularity screen".into(),
        ));
    }
    let res_report = zero_energy_report(resonant_v, grid.r_max().min(60.0), &screen_levels)?;
    if res_report.status != ZeroEnergyStatus::Resonant {
        return Err(ScatterError::Precondition(
            "resonant_v is not flagged resonant by the refinement screen".into(),
        ));
    }
    let (regular, _) = family_envelope(grid, regular_v, f_family, t_list, fit_window)?;
    let (resonant, _) = family_envelope(grid, resonant_v, f_family, t_list, fit_window)?;
    let status = if regular.residual > 0.2 || resonant.residual > 0.2 {
        ComparisonStatus::Indeterminate
    } else {
        ComparisonStatus::Conclusive
    };

    // Exploratory run: orthogonalize the first member against the
    // resonance-shaped profile and fit the early transient.
    let orthogonal_transient_exponent = (|| {
        let u0 = match &f_family[0] {
            WavePacket::Radial3 { u, .. } => u.clone(),
            _ => return None,
        };
        let psi_res: Vec<f64> = grid
            .nodes()
            .iter()
            .map(|&r| r * crate::potentials::aubin_talenti_resonance(1.0, r))
            .collect();
        let nrm = psi_res.iter().map(|x| x * x).sum::<f64>().sqrt();
        let dir: Vec<f64> = psi_res.iter().map(|x| x / nrm).collect();
        let mut u = u0;
        let dot: C64 = u.iter().zip(&dir).map(|(z, &d)| z * d).sum();
        for (z, &d) in u.iter_mut().zip(&dir) {
            *z -= dot * d;
        }
        let packet = f_family[0].with_values(u);
        let early: Vec<f64> = t_list.iter().cloned().filter(|&t| t <= 12.0).collect();
        if early.len() < 8 {
            return None;
        }
        evolve(grid, resonant_v, &packet, &early, true, (2.0, 10.0))
            .ok()
            .map(|run| run.fit.exponent)
    })();

    Ok(DecayComparison {
        exponent_gap: regular.exponent - resonant.exponent,
        regular,
        resonant,
        status,
        orthogonal_transient_exponent,
    })
}

// ---------------------------------------------------------------------------
// small-data mass-critical NLS on the line
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum NlsSign {
    Focusing,
    Defocusing,
}

/// Picard iteration record for the Duhamel fixed point of
/// `iψ_t - ψ_xx = ±|ψ|⁴ψ` with small `L²` data.
#[derive(Debug, Clone, Serialize)]
pub struct NlsRun {
    pub sign: NlsSign,
    pub horizon: f64,
    pub dt: f64,
    /// Space-time `L⁶` norms of the Picard iterates.
    pub iterate_l6_norms: Vec<f64>,
    /// Ratios of successive iterate differences in `L⁶_{t,x}`.
    pub contraction_factors: Vec<f64>,
    pub converged: bool,
    /// `(t, ‖ψ(t)‖₂)` along the converged solution.
    pub mass_trace: Vec<(f64, f64)>,
    /// `L²` distance to a direct split-step solve at the horizon.
    pub direct_solver_distance: f64,
    /// Max violation of `‖ψ(t)‖₂ ≤ ‖ψ₀‖₂ + ∫₀ᵗ ‖ψ(s)‖⁵_{L¹⁰} ds` along the
    /// final iterate (zero when the bound holds).
    pub mass_inequality_violation: f64,
    /// Final-time profile of the fixed point (for external cross-checks).
    #[serde(skip)]
    pub final_state: Vec<C64>,
}

/// Solve the small-data problem by Picard iteration of the Duhamel map,
/// with the free flow as quadrature backbone, then cross-check against a
/// direct split-step NLS integration.
pub fn nls_small_data(
    grid: &Arc<LineGrid>,
    psi0: &[C64],
    sign: NlsSign,
    horizon: f64,
) -> Result<NlsRun> {
    let lf = LineFourier::new(grid);
    let h = grid.spacing();
    let n = grid.len();
    assert_eq!(psi0.len(), n);
    let mass0 = (psi0.iter().map(|z| z.norm_sqr()).sum::<f64>() * h).sqrt();
    if mass0 > 0.1 + 1e-12 {
        return Err(ScatterError::Precondition(format!(
            "small-data solver needs ‖ψ₀‖₂ ≤ 0.1, got {mass0:.3}"
        )));
    }
    let dt = 0.01;
    let n_t = (horizon / dt).ceil() as usize;
    let pm = match sign {
        NlsSign::Focusing => -1.0,
        NlsSign::Defocusing => 1.0,
    };

    let free_step =
        |state: &[C64]| lf.apply_multiplier(state, |xi| (-C64::i() * (xi * xi * dt)).exp());
    let nonlin = |state: &[C64]| -> Vec<C64> {
        state
            .iter()
            .map(|z| {
                let a2 = z.norm_sqr();
                -C64::i() * pm * (a2 * a2) * z
            })
            .collect()
    };

    // Free evolution sampled on the time grid (shared by all iterates).
    let mut free_traj = Vec::with_capacity(n_t + 1);
    free_traj.push(psi0.to_vec());
    for m in 0..n_t {
        let next = free_step(&free_traj[m]);
        free_traj.push(next);
    }

    let l6_spacetime = |traj: &[Vec<C64>]| -> f64 {
        let mut acc = 0.0;
        for (m, state) in traj.iter().enumerate() {
            let w = if m == 0 || m == traj.len() - 1 { 0.5 } else { 1.0 };
            acc += w * dt * state.iter().map(|z| z.norm_sqr().powi(3)).sum::<f64>() * h;
        }
        acc.powf(1.0 / 6.0)
    };

    let mut current = free_traj.clone();
    let mut iterate_l6_norms = vec![l6_spacetime(&current)];
    let mut contraction_factors = Vec::new();
    let mut prev_diff: Option<f64> = None;
    let mut converged = false;
    for _sweep in 0..24 {
        // Duhamel with the integral accumulated by a trapezoidal product rule.
        let mut next: Vec<Vec<C64>> = Vec::with_capacity(n_t + 1);
        next.push(psi0.to_vec());
        let mut integral = vec![C64::new(0.0, 0.0); n];
        let mut nl_prev = nonlin(&current[0]);
        for m in 0..n_t {
            let nl_next = nonlin(&current[m + 1]);
            for (zi, pi) in integral.iter_mut().zip(&nl_prev) {
                *zi += pi * (dt / 2.0);
            }
            integral = free_step(&integral);
            for (zi, ni) in integral.iter_mut().zip(&nl_next) {
                *zi += ni * (dt / 2.0);
            }
            let state: Vec<C64> = free_traj[m + 1]
                .iter()
                .zip(&integral)
                .map(|(a, b)| a + b)
                .collect();
            next.push(state);
            nl_prev = nl_next;
        }
        let diff_traj: Vec<Vec<C64>> = next
            .iter()
            .zip(&current)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect())
            .collect();
        let diff = l6_spacetime(&diff_traj);
        if let Some(p) = prev_diff {
            let factor = diff / p.max(1e-300);
            contraction_factors.push(factor);
            if factor >= 1.0 {
                return Err(ScatterError::SmallnessViolated { factor });
            }
        }
        current = next;
        iterate_l6_norms.push(l6_spacetime(&current));
        if diff < 1e-12 * iterate_l6_norms[0].max(1e-300) {
            converged = true;
            break;
        }
        prev_diff = Some(diff);
    }
    if !converged {
        converged =
            contraction_factors.iter().all(|&f| f < 1.0) && contraction_factors.len() >= 2;
    }

    // Mass trace and the Duhamel mass inequality along the final iterate.
    let mut mass_trace = Vec::new();
    let mut nl_budget = 0.0;
    let mut worst_violation = 0.0_f64;
    for (m, state) in current.iter().enumerate() {
        let t = m as f64 * dt;
        let mass = (state.iter().map(|z| z.norm_sqr()).sum::<f64>() * h).sqrt();
        if m % 10 == 0 || m == n_t {
            mass_trace.push((t, mass));
        }
        let l10 = (state.iter().map(|z| z.norm().powi(10)).sum::<f64>() * h).powf(0.1);
        worst_violation = worst_violation.max(mass - (mass0 + nl_budget));
        nl_budget += l10.powi(5) * dt;
    }

    // Direct split-step NLS cross-check.
    let mut direct = psi0.to_vec();
    for _ in 0..n_t {
        let half = |state: &mut Vec<C64>| {
            for z in state.iter_mut() {
                let a2 = z.norm_sqr();
                *z *= (-C64::i() * (pm * a2 * a2 * dt / 2.0)).exp();
            }
        };
        half(&mut direct);
        direct = free_step(&direct);
        half(&mut direct);
    }
    let direct_solver_distance = (current[n_t]
        .iter()
        .zip(&direct)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        * h)
        .sqrt();

    Ok(NlsRun {
        sign,
        horizon,
        dt,
        iterate_l6_norms,
        contraction_factors,
        converged,
        mass_trace,
        direct_solver_distance,
        mass_inequality_violation: worst_violation,
        final_state: current[n_t].clone(),
    })
}
