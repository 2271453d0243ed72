//! Fourier restriction numerics: surface-measure transforms on spheres and
//! caps, the dyadic decomposition of the sphere convolution operator
//! `T = σ̌ ∗ ·`, the Knapp cap example, and space-time norm probes for the
//! free Schrödinger flow.

use std::sync::Arc;

use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Result, ScatterError};
use crate::freefield::WavePacket;
use crate::numerics::special::bessel_j0;
use crate::numerics::{fit_power_law, gauss_legendre, gauss_legendre_on, LineFourier};
use crate::C64;

const PI: f64 = std::f64::consts::PI;

/// Quadrature representation of a surface measure.
#[derive(Debug, Clone)]
pub struct SurfaceMeasure {
    pub kind: SurfaceKind,
    /// Quadrature nodes embedded in ℝ³ (circles use the z = 0 plane).
    pub nodes: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    /// Azimuthal rings `(z, total weight)` for axisymmetric surfaces; lets
    /// axial-frequency transforms skip the φ sum.
    rings: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum SurfaceKind {
    Sphere3 { radius: f64 },
    Circle2 { radius: f64 },
    /// Smoothed polar cap of angular radius `delta` on the unit sphere,
    /// with relative smoothing width 0.2·delta.
    Cap3 { delta: f64 },
}

/// Smooth transition equal to 1 below 0 and 0 above 1.
fn smooth_step_down(x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else if x >= 1.0 {
        0.0
    } else {
        let a = (-1.0 / (1.0 - x)).exp();
        let b = (-1.0 / x).exp();
        a / (a + b)
    }
}

/// Smoothed cap profile as a function of the polar angle.
pub fn cap_profile(delta: f64, theta: f64) -> f64 {
    smooth_step_down((theta - delta) / (0.2 * delta))
}

impl SurfaceMeasure {
    /// Sphere of the given radius in ℝ³: Gauss-Legendre in `cos θ` times a
    /// uniform (trapezoidal, spectrally accurate) azimuthal rule.
    pub fn sphere_3d(radius: f64, n_theta: usize) -> Self {
        let (mu, wmu) = gauss_legendre(n_theta);
        let n_phi = 2 * n_theta;
        let mut nodes = Vec::with_capacity(n_theta * n_phi);
        let mut weights = Vec::with_capacity(n_theta * n_phi);
        let mut rings = Vec::with_capacity(n_theta);
        for (m, &c) in mu.iter().enumerate() {
            let s = (1.0 - c * c).max(0.0).sqrt();
            let w = wmu[m] * radius * radius * 2.0 * PI / n_phi as f64;
            rings.push((radius * c, w * n_phi as f64));
            for p in 0..n_phi {
                let phi = 2.0 * PI * p as f64 / n_phi as f64;
                nodes.push([radius * s * phi.cos(), radius * s * phi.sin(), radius * c]);
                weights.push(w);
            }
        }
        Self {
            kind: SurfaceKind::Sphere3 { radius },
            nodes,
            weights,
            rings,
        }
    }

    /// Circle of the given radius in the plane.
    pub fn circle_2d(radius: f64, n: usize) -> Self {
        let mut nodes = Vec::with_capacity(n);
        let w = 2.0 * PI * radius / n as f64;
        for p in 0..n {
            let phi = 2.0 * PI * p as f64 / n as f64;
            nodes.push([radius * phi.cos(), radius * phi.sin(), 0.0]);
        }
        Self {
            kind: SurfaceKind::Circle2 { radius },
            nodes,
            weights: vec![w; n],
            rings: Vec::new(),
        }
    }

    /// Smoothed polar cap `f·σ_{S²}` of angular radius `delta`.
    pub fn cap_3d(delta: f64, n_theta: usize) -> Self {
        let theta_max = 1.2 * delta;
        let (th, wth) = gauss_legendre_on(n_theta, 0.0, theta_max);
        let n_phi = 64;
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        let mut rings = Vec::new();
        for (m, &theta) in th.iter().enumerate() {
            let f = cap_profile(delta, theta);
            let w = wth[m] * theta.sin() * f * 2.0 * PI / n_phi as f64;
            rings.push((theta.cos(), w * n_phi as f64));
            for p in 0..n_phi {
                let phi = 2.0 * PI * p as f64 / n_phi as f64;
                nodes.push([
                    theta.sin() * phi.cos(),
                    theta.sin() * phi.sin(),
                    theta.cos(),
                ]);
                weights.push(w);
            }
        }
        Self {
            kind: SurfaceKind::Cap3 { delta },
            nodes,
            weights,
            rings,
        }
    }

    /// Total mass `σ(S)`.
    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Largest quadrature spacing (arc estimate) for sampling checks.
    pub fn node_spacing(&self) -> f64 {
        match self.kind {
            SurfaceKind::Sphere3 { radius } => {
                let n_theta = (self.nodes.len() / 2).max(1);
                PI * radius / (n_theta as f64).sqrt().max(1.0) / 1.0_f64.max(1.0)
            }
            SurfaceKind::Circle2 { radius } => 2.0 * PI * radius / self.nodes.len() as f64,
            SurfaceKind::Cap3 { delta } => 1.2 * delta / (self.nodes.len() as f64 / 64.0),
        }
    }

    /// `σ̂` at an axial frequency `ξ = (0, 0, d)`, using the azimuthal ring
    /// structure (exact φ sum) when available.
    pub fn transform_axial(&self, d: f64) -> C64 {
        if self.rings.is_empty() {
            return self.transform_at([0.0, 0.0, d]);
        }
        self.rings
            .iter()
            .map(|&(z, w)| Complex::from_polar(w, -d * z))
            .sum()
    }

    /// `σ̂(ξ) = ∫ e^{-iξ·ω} dσ(ω)` at a single frequency.
    pub fn transform_at(&self, xi: [f64; 3]) -> C64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(n, &w)| {
                Complex::from_polar(w, -(xi[0] * n[0] + xi[1] * n[1] + xi[2] * n[2]))
            })
            .sum()
    }
}

/// Surface-measure Fourier transform at a list of frequencies, with an
/// oscillation-resolution check on the quadrature.
pub fn sigma_hat(surface: &SurfaceMeasure, xi_list: &[[f64; 3]]) -> Result<Vec<C64>> {
    let xi_max = xi_list
        .iter()
        .map(|x| (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt())
        .fold(0.0, f64::max);
    let spacing = match surface.kind {
        SurfaceKind::Sphere3 { radius } => {
            // θ-resolution of the Gauss-Legendre rule: ~ πR/n_theta.
            let n_theta = ((surface.nodes.len() as f64) / 2.0).sqrt();
            PI * radius / n_theta
        }
        _ => surface.node_spacing(),
    };
    let limit = PI / (4.0 * xi_max.max(1e-300));
    if xi_max > 0.0 && spacing > limit {
        return Err(ScatterError::Undersampled { spacing, limit });
    }
    Ok(xi_list
        .par_iter()
        .map(|&xi| surface.transform_at(xi))
        .collect())
}

// ---------------------------------------------------------------------------
// dyadic pieces of the sphere convolution operator
// ---------------------------------------------------------------------------

/// One dyadic piece `T_j f = (σ̌ χ_{[2^j ≤ |x| ≤ 2^{j+1}]}) ∗ f` of the
/// unit-sphere convolution operator, with its two endpoint norms.
///
/// Both norms are exactly computable for convolution operators:
/// `‖T_j‖_{1→∞}` is the sup of the kernel and `‖T_j‖_{2→2}` the sup of its
/// Fourier symbol.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DyadicPiece {
    pub j: u32,
    pub norm_1_inf: f64,
    pub norm_2_2: f64,
}

/// `σ̌(x) = (2π)^{-3} ∫ e^{ix·ω} dσ = sin|x| / (2π²|x|)` for the unit sphere.
pub fn sigma_check_unit_sphere(r: f64) -> f64 {
    if r == 0.0 {
        1.0 / (2.0 * PI * PI)
    } else {
        r.sin() / (2.0 * PI * PI * r)
    }
}

/// Fourier symbol of `σ̌ χ_{[a ≤ |x| ≤ b]}` at radial frequency `ξ`:
/// `(2/(πξ)) ∫_a^b sin r sin(ξr) dr`, by the closed antiderivative.
fn shell_symbol(a: f64, b: f64, xi: f64) -> f64 {
    assert!(xi > 0.0);
    let term = |r: f64| -> f64 {
        if (1.0 - xi).abs() < 1e-9 {
            0.5 * r - (2.0 * r).sin() / 4.0
        } else {
            ((1.0 - xi) * r).sin() / (2.0 * (1.0 - xi)) - ((1.0 + xi) * r).sin() / (2.0 * (1.0 + xi))
        }
    };
    2.0 / (PI * xi) * (term(b) - term(a))
}

/// Endpoint norms of the dyadic pieces for the listed `j`.
pub fn tomas_dyadic_norms(j_list: &[u32]) -> Vec<DyadicPiece> {
    j_list
        .iter()
        .map(|&j| {
            let a = 2f64.powi(j as i32);
            let b = 2.0 * a;
            // sup of the kernel over the shell.
            let n = 4096;
            let norm_1_inf = (0..=n)
                .map(|i| sigma_check_unit_sphere(a + (b - a) * i as f64 / n as f64).abs())
                .fold(0.0, f64::max);
            // sup of the symbol: scan with extra resolution near ξ = 1 where
            // the shell length resonates.
            let mut norm_2_2 = 0.0_f64;
            let mut scan = |lo: f64, hi: f64, steps: usize| {
                for i in 0..=steps {
                    let xi = lo + (hi - lo) * i as f64 / steps as f64;
                    if xi > 1e-6 {
                        norm_2_2 = norm_2_2.max(shell_symbol(a, b, xi).abs());
                    }
                }
            };
            scan(0.01, 4.0, 4000);
            let w = 4.0 / a;
            scan((1.0 - w).max(0.01), 1.0 + w, 8000);
            DyadicPiece {
                j,
                norm_1_inf,
                norm_2_2,
            }
        })
        .collect()
}

/// Exponent fits across the dyadic pieces and the implied critical index.
#[derive(Debug, Clone, Serialize)]
pub struct TomasSlopes {
    /// Slope of `log₂ ‖T_j‖_{1→∞}` per unit `j` (expected ≈ -(d-1)/2 = -1).
    pub slope_1_inf: f64,
    /// Slope of `log₂ ‖T_j‖_{2→2}` per unit `j` (expected ≈ +1).
    pub slope_2_2: f64,
    /// `p` solving `θ·s₂₂ + (1-θ)·s₁∞ = 0`, `1/p = θ/2 + (1-θ)`:
    /// the critical index `(2d+2)/(d+3) = 4/3` in d = 3.
    pub critical_p: f64,
}

pub fn tomas_slopes(pieces: &[DyadicPiece]) -> Result<TomasSlopes> {
    let s_inf: Vec<(f64, f64)> = pieces
        .iter()
        .map(|p| (2f64.powi(p.j as i32), p.norm_1_inf))
        .collect();
    let s_22: Vec<(f64, f64)> = pieces
        .iter()
        .map(|p| (2f64.powi(p.j as i32), p.norm_2_2))
        .collect();
    let lo = s_inf.first().map(|x| x.0).unwrap_or(1.0);
    let hi = s_inf.last().map(|x| x.0).unwrap_or(2.0);
    let f_inf = fit_power_law(&s_inf, (lo, hi))?;
    let f_22 = fit_power_law(&s_22, (lo, hi))?;
    let slope_1_inf = -f_inf.exponent;
    let slope_2_2 = -f_22.exponent;
    let theta = -slope_1_inf / (slope_2_2 - slope_1_inf);
    let inv_p = theta / 2.0 + (1.0 - theta);
    Ok(TomasSlopes {
        slope_1_inf,
        slope_2_2,
        critical_p: 1.0 / inv_p,
    })
}

// ---------------------------------------------------------------------------
// Knapp example
// ---------------------------------------------------------------------------

/// Measurements for one cap scale δ: the restriction ratio
/// `‖(fσ)^∧‖_{L⁴}/‖f‖_{L²(S²)}` and the dual-cylinder geometry of the
/// half-maximum level set.
#[derive(Debug, Clone, Serialize)]
pub struct KnappRow {
    pub delta: f64,
    pub ratio: f64,
    /// Extent of the half-max set along the cap axis (expected ~ R² = δ⁻²).
    pub long_extent: f64,
    /// Transverse extent of the half-max set (expected ~ R = δ⁻¹).
    pub trans_extent: f64,
    /// Peak height |(fσ)^∧(0)| (expected ~ R^{-(d-1)} = δ²).
    pub peak: f64,
    /// Quarter-max extents, reported for sensitivity.
    pub long_extent_quarter: f64,
    pub trans_extent_quarter: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct KnappTable {
    pub rows: Vec<KnappRow>,
    /// Fitted exponents in `R = 1/δ` of (long, transverse, peak).
    pub long_exponent: f64,
    pub trans_exponent: f64,
    pub peak_exponent: f64,
    /// max ratio / min ratio across the δ list.
    pub ratio_spread: f64,
}

/// `(fσ)^∧(ξ)` for the axisymmetric smoothed cap, via the azimuthal Bessel
/// reduction `2π ∫ f(θ) J₀(ξ_⊥ sinθ) e^{-iξ_z cosθ} sinθ dθ`.
fn cap_transform(delta: f64, xi_perp: f64, xi_z: f64) -> C64 {
    let theta_max = 1.2 * delta;
    let (th, wth) = gauss_legendre_on(96, 0.0, theta_max);
    let mut acc = C64::new(0.0, 0.0);
    for (&theta, &w) in th.iter().zip(&wth) {
        let f = cap_profile(delta, theta);
        if f == 0.0 {
            continue;
        }
        let radial = bessel_j0(xi_perp * theta.sin());
        acc += Complex::from_polar(1.0, -xi_z * theta.cos()) * (f * radial * theta.sin() * w);
    }
    acc * (2.0 * PI)
}

/// Run the Knapp example across `delta_list`.
///
/// The frequency box is sized per δ as `[0, 6R²] × [0, 6R]`; δ below 1/64
/// is rejected as exceeding the built-in grids.
pub fn knapp_ratio(delta_list: &[f64]) -> Result<KnappTable> {
    let mut rows = Vec::new();
    for &delta in delta_list {
        if !(delta > 1.0 / 64.0 && delta <= 0.5) {
            return Err(ScatterError::GridTooSmall(format!(
                "knapp δ = {delta} outside the supported range (1/64, 1/2]"
            )));
        }
        let r_dual = 1.0 / delta;
        let z_max = 6.0 * r_dual * r_dual;
        let p_max = 6.0 * r_dual;
        let (nz, np) = (384usize, 96usize);

        // Axis and transverse sections for level-set extents.
        let axis: Vec<f64> = (0..=2 * nz)
            .map(|i| cap_transform(delta, 0.0, z_max * i as f64 / (2 * nz) as f64).norm())
            .collect();
        let peak = axis[0];
        let extent_along = |vals: &[f64], step: f64, frac: f64| -> f64 {
            let cut = frac * peak;
            let mut last = 0.0;
            for (i, &v) in vals.iter().enumerate() {
                if v >= cut {
                    last = i as f64 * step;
                }
            }
            last
        };
        let zstep = z_max / (2 * nz) as f64;
        let long_extent = extent_along(&axis, zstep, 0.5);
        let long_extent_quarter = extent_along(&axis, zstep, 0.25);
        let trans: Vec<f64> = (0..=2 * np)
            .map(|i| cap_transform(delta, p_max * i as f64 / (2 * np) as f64, 0.0).norm())
            .collect();
        let pstep = p_max / (2 * np) as f64;
        let trans_extent = extent_along(&trans, pstep, 0.5);
        let trans_extent_quarter = extent_along(&trans, pstep, 0.25);

        // L⁴ norm over ℝ³ (axisymmetric cylindrical quadrature; |F| is even
        // in ξ_z for the real cap profile).
        let p_dual = 4.0;
        let rows_z: Vec<f64> = (0..nz)
            .into_par_iter()
            .map(|iz| {
                let z = (iz as f64 + 0.5) * z_max / nz as f64;
                let mut acc = 0.0;
                for ip in 0..np {
                    let perp = (ip as f64 + 0.5) * p_max / np as f64;
                    let v = cap_transform(delta, perp, z).norm();
                    acc += v.powf(p_dual) * perp * (p_max / np as f64);
                }
                acc * 2.0 * PI * (z_max / nz as f64)
            })
            .collect();
        let l4_pow = 2.0 * rows_z.iter().sum::<f64>(); // both signs of ξ_z
        let l4 = l4_pow.powf(1.0 / p_dual);

        // ‖f‖_{L²(S²)}.
        let (th, wth) = gauss_legendre_on(128, 0.0, 1.2 * delta);
        let l2_cap = (2.0
            * PI
            * th
                .iter()
                .zip(&wth)
                .map(|(&t, &w)| cap_profile(delta, t).powi(2) * t.sin() * w)
                .sum::<f64>())
        .sqrt();

        rows.push(KnappRow {
            delta,
            ratio: l4 / l2_cap,
            long_extent,
            trans_extent,
            peak,
            long_extent_quarter,
            trans_extent_quarter,
        });
    }

    let fit_in_r = |sel: &dyn Fn(&KnappRow) -> f64| -> Result<f64> {
        let pts: Vec<(f64, f64)> = rows.iter().map(|r| (1.0 / r.delta, sel(r))).collect();
        let lo = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
        let hi = pts.iter().map(|p| p.0).fold(0.0, f64::max);
        // fit_power_law returns e with value ~ R^{-e}; report the growth rate.
        Ok(-fit_power_law(&pts, (lo, hi))?.exponent)
    };
    let long_exponent = fit_in_r(&|r| r.long_extent)?;
    let trans_exponent = fit_in_r(&|r| r.trans_extent)?;
    let peak_exponent = fit_in_r(&|r| r.peak)?;
    let ratio_spread = rows.iter().map(|r| r.ratio).fold(0.0, f64::max)
        / rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);

    Ok(KnappTable {
        rows,
        long_exponent,
        trans_exponent,
        peak_exponent,
        ratio_spread,
    })
}

// ---------------------------------------------------------------------------
// Strichartz probe (d = 1, q = 6)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct StrichartzReport {
    pub max_ratio: f64,
    pub ratios: Vec<f64>,
}

/// Max over the family of `‖e^{-itΔ}f‖_{L⁶_{t,x}} / ‖f‖_{L²}` on the line.
///
/// Time integration uses graded Gauss-Legendre panels over `[-t_max, t_max]`
/// (fine near the transient, coarse in the decaying tail). Packets whose
/// boundary mass exceeds 1% at any sampled time are rejected.
pub fn strichartz_ratio(family: &[WavePacket], t_max: f64) -> Result<StrichartzReport> {
    if family.is_empty() {
        return Ok(StrichartzReport {
            max_ratio: 0.0,
            ratios: Vec::new(),
        });
    }
    let ratios: Vec<Result<f64>> = family
        .par_iter()
        .map(|f| strichartz_single(f, t_max))
        .collect();
    let mut out = Vec::with_capacity(ratios.len());
    for r in ratios {
        out.push(r?);
    }
    Ok(StrichartzReport {
        max_ratio: out.iter().cloned().fold(0.0, f64::max),
        ratios: out,
    })
}

fn strichartz_single(f: &WavePacket, t_max: f64) -> Result<f64> {
    let (grid, psi0) = match f {
        WavePacket::Line1 { grid, psi } => (grid.clone(), psi.clone()),
        _ => {
            return Err(ScatterError::Precondition(
                "strichartz probe needs 1D packets".into(),
            ))
        }
    };
    let l2 = f.norms().l2;
    if l2 == 0.0 {
        return Ok(0.0);
    }
    let lf = LineFourier::new(&grid);
    let spectrum = lf.forward(&psi0);
    let h = grid.spacing();
    let n = grid.len();

    // |ψ(t)|⁶ mass at one time, with a boundary-mass screen.
    let space_l6 = |t: f64| -> Result<f64> {
        let mut s = spectrum.clone();
        for (k, z) in s.iter_mut().enumerate() {
            let xi = lf.frequency(k);
            *z *= (-C64::i() * (xi * xi * t)).exp();
        }
        let psi = lf.inverse(&s);
        let edge = n / 20;
        let outer: f64 = psi[..edge]
            .iter()
            .chain(psi[n - edge..].iter())
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            * h;
        if outer > 0.01 * l2 * l2 {
            return Err(ScatterError::Horizon {
                fraction: outer / (l2 * l2),
                limit: 0.01,
            });
        }
        Ok(psi.iter().map(|z| z.norm_sqr().powi(3)).sum::<f64>() * h)
    };

    // Graded panels: width grows geometrically from 0.05 out to t_max, both
    // time signs. The free 1D flow has ∫|ψ(t)|⁶dx ~ C t⁻² at large |t|, so
    // the truncated tail is closed with ∫_{t_max}^∞ C t⁻² dt = C/t_max.
    let mut acc = 0.0;
    for sign in [-1.0, 1.0] {
        let mut left = 0.0;
        let mut width = 0.05;
        while left < t_max {
            let right = (left + width).min(t_max);
            let (ts, ws) = gauss_legendre_on(12, left, right);
            for (&t, &w) in ts.iter().zip(&ws) {
                acc += space_l6(sign * t)? * w;
            }
            left = right;
            width *= 1.6;
        }
        acc += space_l6(sign * t_max)? * t_max;
    }
    Ok(acc.powf(1.0 / 6.0) / l2)
}

/// Seeded family of normalized 1D packets (Gaussians with varied width,
/// center, modulation and chirp).
pub fn packet_family(
    grid: &Arc<crate::numerics::LineGrid>,
    seed: u64,
    count: usize,
) -> Vec<WavePacket> {
    use rand::Rng;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let w: f64 = 0.7 + 1.8 * rng.random::<f64>();
            let x0: f64 = -4.0 + 8.0 * rng.random::<f64>();
            let k0: f64 = -1.5 + 3.0 * rng.random::<f64>();
            let chirp: f64 = -0.2 + 0.4 * rng.random::<f64>();
            let pkt = WavePacket::line_from_psi(grid, |x| {
                let u = (x - x0) / w;
                Complex::from_polar((-u * u / 2.0).exp(), k0 * x + chirp * u * u)
            });
            let l2 = pkt.norms().l2;
            pkt.with_values(pkt.values().iter().map(|z| z / l2).collect())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::LineGrid;

    #[test]
    fn sphere_mass_and_closed_form() {
        let s = SurfaceMeasure::sphere_3d(1.0, 64);
        assert!((s.total_mass() - 4.0 * PI).abs() < 1e-10 * 4.0 * PI);
        let c = SurfaceMeasure::circle_2d(1.0, 256);
        assert!((c.total_mass() - 2.0 * PI).abs() < 1e-12 * 2.0 * PI);

        // σ̂ at 0 is the mass; at |ξ| = π the sphere transform vanishes.
        let vals = sigma_hat(&s, &[[0.0; 3], [0.0, 0.0, PI], [0.0, 0.0, 2.0]]).unwrap();
        assert!((vals[0].re - 4.0 * PI).abs() < 1e-9);
        assert!(vals[1].norm() < 1e-9, "σ̂(π) = {}", vals[1]);
        let exact = 4.0 * PI * 2.0f64.sin() / 2.0;
        assert!((vals[2].re - exact).abs() < 1e-9);
        // Real for centrally symmetric surfaces.
        for v in &vals {
            assert!(v.im.abs() < 1e-10);
        }
    }

    #[test]
    fn sphere_transform_undersampling_guard() {
        let s = SurfaceMeasure::sphere_3d(1.0, 16);
        assert!(matches!(
            sigma_hat(&s, &[[0.0, 0.0, 120.0]]),
            Err(ScatterError::Undersampled { .. })
        ));
    }

    #[test]
    fn sphere_decay_exponent_is_one() {
        // Envelope of |σ̂_{S²}| over |ξ| ∈ [5, 100]: local maxima of
        // 4π|sin ξ|/ξ sit on the curve 4π/ξ.
        let s = SurfaceMeasure::sphere_3d(1.0, 288);
        let xi: Vec<[f64; 3]> = (0..1400)
            .map(|i| [0.0, 0.0, 5.0 + 55.0 * i as f64 / 1399.0])
            .collect();
        let vals = sigma_hat(&s, &xi).unwrap();
        let mut peaks = Vec::new();
        for i in 1..vals.len() - 1 {
            let (a, b, c) = (vals[i - 1].norm(), vals[i].norm(), vals[i + 1].norm());
            if b > a && b > c {
                peaks.push((xi[i][2], b));
            }
        }
        assert!(peaks.len() >= 10);
        let fit = fit_power_law(&peaks, (5.0, 60.0)).unwrap();
        assert!(
            (fit.exponent - 1.0).abs() < 0.05,
            "sphere decay exponent {}",
            fit.exponent
        );
    }

    #[test]
    fn circle_decay_exponent_is_half() {
        let c = SurfaceMeasure::circle_2d(1.0, 2048);
        let xi: Vec<[f64; 3]> = (0..3000)
            .map(|i| [5.0 + 95.0 * i as f64 / 2999.0, 0.0, 0.0])
            .collect();
        let vals = sigma_hat(&c, &xi).unwrap();
        let mut peaks = Vec::new();
        for i in 1..vals.len() - 1 {
            let (a, b, cc) = (vals[i - 1].norm(), vals[i].norm(), vals[i + 1].norm());
            if b > a && b > cc {
                peaks.push((xi[i][0], b));
            }
        }
        let fit = fit_power_law(&peaks, (5.0, 100.0)).unwrap();
        assert!(
            (fit.exponent - 0.5).abs() < 0.05,
            "circle decay exponent {}",
            fit.exponent
        );
    }

    #[test]
    fn dyadic_slopes_and_critical_index() {
        let pieces = tomas_dyadic_norms(&[0, 1, 2, 3, 4, 5, 6, 7]);
        let slopes = tomas_slopes(&pieces).unwrap();
        assert!(
            (slopes.slope_1_inf + 1.0).abs() < 0.1,
            "1→∞ slope {}",
            slopes.slope_1_inf
        );
        assert!(
            (slopes.slope_2_2 - 1.0).abs() < 0.1,
            "2→2 slope {}",
            slopes.slope_2_2
        );
        assert!(
            (slopes.critical_p - 4.0 / 3.0).abs() < 0.05,
            "critical index {}",
            slopes.critical_p
        );
    }

    #[test]
    fn dyadic_norms_match_brute_force_on_coarse_grid() {
        // Sample the shell kernel on a coarse 3D box and compare sup-kernel
        // and sup-symbol against the module's semi-analytic values.
        let j = 1u32;
        let piece = &tomas_dyadic_norms(&[j])[0];
        let (a, b) = (2f64.powi(j as i32), 2f64.powi(j as i32 + 1));
        let l = b + 0.5;
        let nn = 28usize;
        let hh = 2.0 * l / nn as f64;
        let mut max_kernel = 0.0_f64;
        let mut samples = Vec::new();
        for ix in 0..nn {
            for iy in 0..nn {
                for iz in 0..nn {
                    let x = -l + (ix as f64 + 0.5) * hh;
                    let y = -l + (iy as f64 + 0.5) * hh;
                    let z = -l + (iz as f64 + 0.5) * hh;
                    let r = (x * x + y * y + z * z).sqrt();
                    let val = if (a..=b).contains(&r) {
                        sigma_check_unit_sphere(r)
                    } else {
                        0.0
                    };
                    if val.abs() > max_kernel {
                        max_kernel = val.abs();
                    }
                    if val != 0.0 {
                        samples.push((x, y, z, val));
                    }
                }
            }
        }
        assert!(
            (max_kernel - piece.norm_1_inf).abs() < 0.05 * piece.norm_1_inf,
            "{max_kernel} vs {}",
            piece.norm_1_inf
        );
        // Brute-force symbol along one axis.
        let mut max_symbol = 0.0_f64;
        for i in 0..200 {
            let xi = 0.05 + 2.0 * i as f64 / 199.0;
            let mut acc = C64::new(0.0, 0.0);
            for &(x, _y, _z, v) in &samples {
                let _ = _y;
                acc += Complex::from_polar(v * hh * hh * hh, -xi * x);
            }
            max_symbol = max_symbol.max(acc.norm());
        }
        assert!(
            (max_symbol - piece.norm_2_2).abs() < 0.15 * piece.norm_2_2,
            "{max_symbol} vs {}",
            piece.norm_2_2
        );
    }

    #[test]
    fn knapp_balance_and_cylinder_exponents() {
        // Eight log-spaced cap scales spanning [1/32, 1/4].
        let deltas: Vec<f64> = (0..8).map(|k| 0.25 * 2f64.powf(-(k as f64) * 3.0 / 7.0)).collect();
        let table = knapp_ratio(&deltas).unwrap();
        assert!(
            table.ratio_spread <= 2.0,
            "ratio spread {}",
            table.ratio_spread
        );
        assert!(
            (table.long_exponent - 2.0).abs() <= 0.2,
            "long-axis exponent {}",
            table.long_exponent
        );
        assert!(
            (table.trans_exponent - 1.0).abs() <= 0.2,
            "transverse exponent {}",
            table.trans_exponent
        );
        assert!(
            (table.peak_exponent + 2.0).abs() <= 0.2,
            "peak exponent {}",
            table.peak_exponent
        );
        assert!(matches!(
            knapp_ratio(&[1.0 / 128.0]),
            Err(ScatterError::GridTooSmall(_))
        ));
    }

    #[test]
    fn strichartz_family_stability_and_translation_invariance() {
        let grid = LineGrid::new(600.0, 59049);
        let fam8 = packet_family(&grid, 7, 8);
        let fam16 = packet_family(&grid, 7, 16);
        let r8 = strichartz_ratio(&fam8, 40.0).unwrap();
        let r16 = strichartz_ratio(&fam16, 40.0).unwrap();
        assert!(r16.max_ratio >= r8.max_ratio - 1e-12);
        assert!(
            (r16.max_ratio - r8.max_ratio) / r8.max_ratio <= 0.10,
            "family growth moved the max ratio too much: {} → {}",
            r8.max_ratio,
            r16.max_ratio
        );

        // Translation and modulation invariance.
        let base = WavePacket::line_from_psi(&grid, |x| C64::new((-x * x / 2.0).exp(), 0.0));
        let shifted = WavePacket::line_from_psi(&grid, |x| {
            Complex::from_polar((-(x - 3.0) * (x - 3.0) / 2.0).exp(), 0.8 * x)
        });
        let nb = base.norms().l2;
        let ns = shifted.norms().l2;
        let rb = strichartz_single(
            &base.with_values(base.values().iter().map(|z| z / nb).collect()),
            40.0,
        )
        .unwrap();
        let rs = strichartz_single(
            &shifted.with_values(shifted.values().iter().map(|z| z / ns).collect()),
            40.0,
        )
        .unwrap();
        assert!((rb - rs).abs() < 1e-6 * rb, "{rb} vs {rs}");
    }

    #[test]
    fn strichartz_scaling_invariance() {
        // f_λ(x) = λ^{1/2} f(λx) leaves the L⁶_{t,x}/L² ratio invariant.
        let grid = LineGrid::new(600.0, 59049);
        let lam: f64 = 2.0;
        let f = WavePacket::line_from_psi(&grid, |x| C64::new((-x * x / 2.0).exp(), 0.0));
        let fl = WavePacket::line_from_psi(&grid, |x| {
            C64::new(lam.sqrt() * (-(lam * x) * (lam * x) / 2.0).exp(), 0.0)
        });
        let nf = f.norms().l2;
        let nfl = fl.norms().l2;
        let r1 = strichartz_single(&f.with_values(f.values().iter().map(|z| z / nf).collect()), 40.0)
            .unwrap();
        let r2 = strichartz_single(
            &fl.with_values(fl.values().iter().map(|z| z / nfl).collect()),
            40.0,
        )
        .unwrap();
        assert!(
            (r1 - r2).abs() <= 1e-3 * r1,
            "scaling moved the ratio: {r1} vs {r2}"
        );
    }

    #[test]
    fn strichartz_zero_and_horizon() {
        let grid = LineGrid::new(40.0, 2187);
        let zero = WavePacket::line_from_psi(&grid, |_| C64::new(0.0, 0.0));
        let r = strichartz_ratio(&[zero], 10.0).unwrap();
        assert_eq!(r.max_ratio, 0.0);
        // A packet parked at the boundary trips the horizon check.
        let stuck = WavePacket::line_from_psi(&grid, |x| {
            C64::new((-(x - 39.0) * (x - 39.0)).exp(), 0.0)
        });
        assert!(matches!(
            strichartz_ratio(&[stuck], 10.0),
            Err(ScatterError::Horizon { .. })
        ));
    }
}
