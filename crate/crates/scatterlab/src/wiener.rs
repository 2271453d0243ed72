//! The operator-valued convolution algebra of kernel families on the
//! ρ-line, realized on discretized `L¹` of radial functions.
//!
//! A family is a lattice of kernel matrices `T(ρ_k)` on an integer ρ-grid
//! (spacing matched to the radial grid so that the spherical-interaction
//! edges `|r_i ± s_j|` land exactly on lattice nodes). Convolution, Fourier
//! symbols, and inversion are pure lattice algebra, so the algebra axioms
//! (associativity, submultiplicativity, the homomorphism property of the
//! symbol map) hold to rounding. A separate cell-exact transform
//! [`RhoKernelFamily::continuum_symbol`] reproduces the continuum Fourier
//! integral of the built kernels, which is what the Birman-Schwinger
//! cross-identity `T̂⁻(λ) = V R₀⁻(λ²)` compares against.

use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Result, ScatterError};
use crate::freefield::Branch;
use crate::linalg;
use crate::numerics::{LineGrid, RadialGrid};
use crate::potentials::Potential;
use crate::C64;

const PI: f64 = std::f64::consts::PI;

/// Element of the operator-valued convolution algebra: kernel matrices on
/// an integer ρ-lattice. Matrices act on radial ψ-samples and carry their
/// quadrature weights; the underlying space is discretized `L¹(ℝ³)` with
/// node masses `μ_i = 4π r_i² h`.
#[derive(Debug, Clone)]
pub struct RhoKernelFamily {
    /// The working ρ-window (symmetric, odd node count, node at 0).
    pub line: Arc<LineGrid>,
    pub radial: Arc<RadialGrid>,
    /// Signed lattice index of `kernels[0]`.
    support_lo: i64,
    kernels: Vec<DMatrix<C64>>,
}

impl RhoKernelFamily {
    pub fn zero(line: &Arc<LineGrid>, radial: &Arc<RadialGrid>) -> Self {
        Self {
            line: line.clone(),
            radial: radial.clone(),
            support_lo: 0,
            kernels: Vec::new(),
        }
    }

    pub fn from_kernels(
        line: &Arc<LineGrid>,
        radial: &Arc<RadialGrid>,
        support_lo: i64,
        kernels: Vec<DMatrix<C64>>,
    ) -> Self {
        Self {
            line: line.clone(),
            radial: radial.clone(),
            support_lo,
            kernels,
        }
    }

    pub fn spacing(&self) -> f64 {
        self.line.spacing()
    }

    pub fn support(&self) -> (i64, i64) {
        (
            self.support_lo,
            self.support_lo + self.kernels.len() as i64 - 1,
        )
    }

    pub fn kernel_at(&self, index: i64) -> Option<&DMatrix<C64>> {
        let off = index - self.support_lo;
        if off < 0 || off >= self.kernels.len() as i64 {
            None
        } else {
            Some(&self.kernels[off as usize])
        }
    }

    /// `L¹` node masses of the radial space.
    pub fn node_masses(&self) -> Vec<f64> {
        let h = self.radial.spacing();
        self.radial
            .nodes()
            .iter()
            .map(|&r| 4.0 * PI * r * r * h)
            .collect()
    }

    /// Algebra norm: the `X → L¹(ℝ; X)` operator norm on discretized `L¹`,
    /// i.e. the weighted max-column-sum of the ρ-integrated absolute kernel.
    pub fn algebra_norm(&self) -> f64 {
        if self.kernels.is_empty() {
            return 0.0;
        }
        let mu = self.node_masses();
        let n = self.radial.len();
        let h = self.spacing();
        (0..n)
            .into_par_iter()
            .map(|j| {
                let mut acc = 0.0;
                for k in &self.kernels {
                    for i in 0..n {
                        acc += k[(i, j)].norm() * mu[i];
                    }
                }
                acc * h / mu[j]
            })
            .reduce(|| 0.0, f64::max)
    }

    /// Per-node `L¹→L¹` operator norms (for the tail diagnostic).
    pub fn node_norms(&self) -> Vec<(i64, f64)> {
        let mu = self.node_masses();
        self.kernels
            .iter()
            .enumerate()
            .map(|(o, k)| (self.support_lo + o as i64, linalg::norm_l1_op(k, &mu)))
            .collect()
    }

    /// Lattice shift by `m` nodes: `T(· - mh)`.
    pub fn shifted(&self, m: i64) -> Self {
        Self {
            line: self.line.clone(),
            radial: self.radial.clone(),
            support_lo: self.support_lo + m,
            kernels: self.kernels.clone(),
        }
    }

    /// Pointwise difference (supports merged).
    pub fn sub(&self, other: &Self) -> Self {
        assert!(self.compatible(other));
        let lo = self.support_lo.min(other.support_lo);
        let hi = (self.support_lo + self.kernels.len() as i64)
            .max(other.support_lo + other.kernels.len() as i64);
        let n = self.radial.len();
        let mut kernels = vec![DMatrix::zeros(n, n); (hi - lo) as usize];
        for (o, k) in self.kernels.iter().enumerate() {
            kernels[(self.support_lo - lo) as usize + o] += k;
        }
        for (o, k) in other.kernels.iter().enumerate() {
            kernels[(other.support_lo - lo) as usize + o] -= k;
        }
        Self {
            line: self.line.clone(),
            radial: self.radial.clone(),
            support_lo: lo,
            kernels,
        }
    }

    /// Restriction to `|ρ| ≥ R`.
    pub fn tail_beyond(&self, r_cut: f64) -> Self {
        let h = self.spacing();
        let kernels: Vec<DMatrix<C64>> = self
            .kernels
            .iter()
            .enumerate()
            .map(|(o, k)| {
                let rho = (self.support_lo + o as i64) as f64 * h;
                if rho.abs() >= r_cut {
                    k.clone()
                } else {
                    DMatrix::zeros(k.nrows(), k.ncols())
                }
            })
            .collect();
        Self {
            line: self.line.clone(),
            radial: self.radial.clone(),
            support_lo: self.support_lo,
            kernels,
        }
    }

    pub fn compatible(&self, other: &Self) -> bool {
        self.radial.same_as(&other.radial)
            && (self.spacing() - other.spacing()).abs() < 1e-14 * self.spacing()
    }

    /// Character map of the lattice algebra:
    /// `T̂(λ) = h Σ_k e^{-iλρ_k} T(ρ_k)`.
    ///
    /// Exactly multiplicative under [`convolve`]; requires `h·λ ≤ π/4`.
    pub fn symbol(&self, lambda: f64) -> Result<DMatrix<C64>> {
        let h = self.spacing();
        if h * lambda.abs() > PI / 4.0 + 1e-12 {
            return Err(ScatterError::Undersampled {
                spacing: h,
                limit: PI / (4.0 * lambda.abs()),
            });
        }
        Ok(self.symbol_unchecked(lambda))
    }

    pub(crate) fn symbol_unchecked(&self, lambda: f64) -> DMatrix<C64> {
        let n = self.radial.len();
        let h = self.spacing();
        let mut acc: DMatrix<C64> = DMatrix::zeros(n, n);
        for (o, k) in self.kernels.iter().enumerate() {
            let rho = (self.support_lo + o as i64) as f64 * h;
            let phase = (-C64::i() * (lambda * rho)).exp() * h;
            acc += k * phase;
        }
        acc
    }

    /// Cell-exact continuum transform: the lattice character corrected by
    /// `tan(λh/2)/(λh/2)`, which is the exact Fourier integral for kernels
    /// that are indicators with lattice-aligned edges stored as trapezoidal
    /// cell averages (the [`build_t_minus`] construction). Valid for
    /// `|λ| < π/h`.
    pub fn continuum_symbol(&self, lambda: f64) -> DMatrix<C64> {
        let theta = lambda * self.spacing() / 2.0;
        let corr = if theta.abs() < 1e-8 {
            1.0
        } else {
            theta.tan() / theta
        };
        self.symbol_unchecked(lambda) * C64::from(corr)
    }
}

/// `T̂(λ)` at each requested frequency (the algebra character map).
pub fn fourier_transform(t: &RhoKernelFamily, lambda_grid: &[f64]) -> Result<Vec<DMatrix<C64>>> {
    lambda_grid.iter().map(|&l| t.symbol(l)).collect()
}

/// Discrete convolution in ρ with operator composition per pair:
/// `(S ∗ T)(ρ_m) = h Σ_k S(ρ_{m-k}) T(ρ_k)`.
pub fn convolve(s: &RhoKernelFamily, t: &RhoKernelFamily) -> Result<RhoKernelFamily> {
    if !s.compatible(t) {
        return Err(ScatterError::GridMismatch(
            "convolution needs matching ρ-spacing and radial grid".into(),
        ));
    }
    let n = s.radial.len();
    if s.kernels.is_empty() || t.kernels.is_empty() {
        return Ok(RhoKernelFamily::zero(&s.line, &s.radial));
    }
    let h = s.spacing();
    let lo = s.support_lo + t.support_lo;
    let len = s.kernels.len() + t.kernels.len() - 1;
    let kernels: Vec<DMatrix<C64>> = (0..len)
        .into_par_iter()
        .map(|m| {
            let mut acc: DMatrix<C64> = DMatrix::zeros(n, n);
            for (kt, tk) in t.kernels.iter().enumerate() {
                let ks = m as i64 - kt as i64;
                if ks >= 0 && (ks as usize) < s.kernels.len() {
                    acc += &s.kernels[ks as usize] * tk;
                }
            }
            acc * C64::from(h)
        })
        .collect();
    Ok(RhoKernelFamily::from_kernels(&s.line, &s.radial, lo, kernels))
}

// ---------------------------------------------------------------------------
// the spherical-mean family T⁻
// ---------------------------------------------------------------------------

/// Continuum radial reduction of the spherical-mean kernel:
/// `(T⁻(ρ)f)(r) = V(r)/(2r) ∫_{|r-ρ|}^{r+ρ} u f(u) du`.
pub fn t_minus_apply_continuum<F: Fn(f64) -> f64>(
    v: &Potential,
    rho: f64,
    r: f64,
    f: F,
) -> f64 {
    let lo = (r - rho).abs();
    let hi = r + rho;
    let n = 4000;
    let dh = (hi - lo) / n as f64;
    let integral: f64 = (0..n)
        .map(|i| {
            let u = lo + (i as f64 + 0.5) * dh;
            u * f(u) * dh
        })
        .sum();
    v.eval(r) / (2.0 * r) * integral
}

/// Build the lattice family for `T⁻(ρ)f(x) = (4πρ)⁻¹ V(x) ∫_{|x-y|=ρ} f dσ`.
///
/// Per matrix entry the ρ-dependence is the indicator of
/// `[|r_i - s_j|, r_i + s_j]`, whose edges are lattice-aligned; nodes store
/// trapezoidal cell averages, making [`RhoKernelFamily::continuum_symbol`]
/// exact. Errors when the ρ-window does not cover the support interactions.
pub fn build_t_minus(
    v: &Potential,
    radial: &Arc<RadialGrid>,
    line: &Arc<LineGrid>,
) -> Result<RhoKernelFamily> {
    let h = radial.spacing();
    if (line.spacing() - h).abs() > 1e-12 * h {
        return Err(ScatterError::GridMismatch(format!(
            "ρ-spacing {} must equal the radial spacing {h}",
            line.spacing()
        )));
    }
    let n = radial.len();
    let needed = 2 * n; // edges reach (2n-1)·h
    if line.index_offset() < needed as i64 {
        return Err(ScatterError::GridTooSmall(format!(
            "ρ-window half-width {} nodes, support needs {needed}",
            line.index_offset()
        )));
    }
    let vs = v.sample(radial);
    let nodes = radial.nodes();
    // Node k carries the kernel for ρ = k·h, k = 0..2n-1; entry (i,j) is
    // c_ij when |i-j| < k < i+j+1, c_ij/2 at the two edges, else 0.
    let kernels: Vec<DMatrix<C64>> = (0..=(2 * n as i64 - 1))
        .into_par_iter()
        .map(|k| {
            DMatrix::from_fn(n, n, |i, j| {
                let a = (i as i64 - j as i64).abs();
                let b = i as i64 + j as i64 + 1;
                let c = vs[i] * nodes[j] * h / (2.0 * nodes[i]);
                let w = if k == a || k == b {
                    0.5
                } else if k > a && k < b {
                    1.0
                } else {
                    0.0
                };
                C64::from(c * w)
            })
        })
        .collect();
    Ok(RhoKernelFamily::from_kernels(line, radial, 0, kernels))
}

// ---------------------------------------------------------------------------
// diagnostics
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct WienerDiagnostics {
    /// `(δ, ‖T(·) - T(·-δ)‖)` for the family itself (power N = 1).
    pub continuity_modulus: Vec<(f64, f64)>,
    /// Same for `T ∗ T` (power N = 2).
    pub continuity_modulus_squared: Vec<(f64, f64)>,
    /// Fitted decay rate of the modulus in δ (positive = continuity holds).
    pub modulus_rate: f64,
    /// `(R, ‖T χ_{|ρ| ≥ R}‖)`.
    pub tail_mass: Vec<(f64, f64)>,
    /// `(λ, σ_min(I + T̂(λ)))` over the probe grid.
    pub symbol_sigma_min: Vec<(f64, f64)>,
}

pub fn diagnostics(t: &RhoKernelFamily, lambda_grid: &[f64]) -> Result<WienerDiagnostics> {
    let h = t.spacing();
    let shifts = [16i64, 8, 4, 2, 1];
    let modulus = |fam: &RhoKernelFamily| -> Vec<(f64, f64)> {
        shifts
            .iter()
            .map(|&m| (m as f64 * h, fam.sub(&fam.shifted(m)).algebra_norm()))
            .collect()
    };
    let continuity_modulus = modulus(t);
    let t2 = convolve(t, t)?;
    let continuity_modulus_squared = modulus(&t2);
    let pts: Vec<(f64, f64)> = continuity_modulus
        .iter()
        .filter(|&&(_, v)| v > 0.0)
        .cloned()
        .collect();
    let modulus_rate = if pts.len() >= 2 {
        // slope of log modulus vs log δ
        let (x0, y0) = (pts[pts.len() - 1].0.ln(), pts[pts.len() - 1].1.ln());
        let (x1, y1) = (pts[0].0.ln(), pts[0].1.ln());
        (y1 - y0) / (x1 - x0)
    } else {
        0.0
    };
    let (lo, hi) = t.support();
    let r_max = (lo.abs().max(hi.abs()) as f64) * h;
    let tail_mass = (0..8)
        .map(|i| {
            let r = r_max * i as f64 / 8.0;
            (r, t.tail_beyond(r).algebra_norm())
        })
        .collect();
    let radii = t.radial.nodes().to_vec();
    let symbol_sigma_min = lambda_grid
        .iter()
        .map(|&l| {
            let sym = t.symbol(l)?;
            let m = linalg::identity(t.radial.len()) + sym;
            Ok((l, linalg::weighted_sigma_min(&m, &radii)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(WienerDiagnostics {
        continuity_modulus,
        continuity_modulus_squared,
        modulus_rate,
        tail_mass,
        symbol_sigma_min,
    })
}

// ---------------------------------------------------------------------------
// inversion
// ---------------------------------------------------------------------------

/// Result of inverting `1 + T` in the adjoined-unit algebra.
#[derive(Debug, Clone)]
pub struct WienerInverse {
    pub s: RhoKernelFamily,
    pub s_norm: f64,
    /// `‖(1+T)∗(1+S) - 1‖` and `‖(1+S)∗(1+T) - 1‖` in the algebra norm.
    pub residual_right: f64,
    pub residual_left: f64,
    /// Smallest `σ_min(I + T̂(λ))` over the dual grid, with its λ.
    pub worst_symbol: (f64, f64),
}

/// Invert `1 + T` by per-frequency symbol inversion on the DFT dual grid of
/// the working window, followed by the inverse lattice transform.
///
/// Preconditions: decreasing continuity modulus and tail mass (diagnostics),
/// and `σ_min(I + T̂(λ)) > 1e-8` at every dual node — otherwise
/// [`ScatterError::NonInvertibleSymbol`] reports the offending frequency.
pub fn wiener_invert(t: &RhoKernelFamily) -> Result<WienerInverse> {
    let n = t.radial.len();
    let h = t.spacing();
    let big_n = t.line.len();
    let m_half = t.line.index_offset();
    let (lo, hi) = t.support();
    if lo < -m_half || hi > m_half {
        return Err(ScatterError::GridTooSmall(
            "family support exceeds the ρ-window".into(),
        ));
    }
    // Light precondition screen (hard gate is the symbol check below).
    let diag_probe = diagnostics(t, &[0.0])?;
    let tm = &diag_probe.tail_mass;
    if tm.len() >= 2 && tm[tm.len() - 1].1 > tm[0].1 {
        return Err(ScatterError::Precondition(
            "tail mass not decreasing".into(),
        ));
    }

    // Entrywise FFT over the ρ-axis: gather per (i,j), transform, invert
    // per dual node, transform back.
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(big_n);
    let ifft = planner.plan_fft_inverse(big_n);

    // symbol[j][i,j-entry]: store as Vec over dual nodes of matrices.
    let mut symbols: Vec<DMatrix<C64>> = vec![DMatrix::zeros(n, n); big_n];
    {
        let columns: Vec<Vec<C64>> = (0..n * n)
            .into_par_iter()
            .map(|e| {
                let (i, j) = (e / n, e % n);
                let mut arr = vec![C64::new(0.0, 0.0); big_n];
                for (o, k) in t.kernels.iter().enumerate() {
                    let idx = (t.support_lo + o as i64 + m_half) as usize;
                    arr[idx] = k[(i, j)];
                }
                let mut buf = arr;
                fft.process(&mut buf);
                // phase e^{2πi q M / N}·h turns the array DFT into
                // T̂(λ_q) = h Σ_k e^{-iλ_q kh} T_k.
                for (q, z) in buf.iter_mut().enumerate() {
                    let phase =
                        C64::from_polar(h, 2.0 * PI * (q as f64) * (m_half as f64) / big_n as f64);
                    *z *= phase;
                }
                buf
            })
            .collect();
        for (e, col) in columns.iter().enumerate() {
            let (i, j) = (e / n, e % n);
            for q in 0..big_n {
                symbols[q][(i, j)] = col[q];
            }
        }
    }

    let lambda_of = |q: usize| -> f64 {
        let signed = if q as i64 <= (big_n as i64 - 1) / 2 {
            q as i64
        } else {
            q as i64 - big_n as i64
        };
        2.0 * PI * signed as f64 / (big_n as f64 * h)
    };

    // Invert I + T̂ per dual node.
    let radii = t.radial.nodes().to_vec();
    let inverted: Vec<Result<DMatrix<C64>>> = symbols
        .par_iter()
        .enumerate()
        .map(|(q, sym)| {
            let m = linalg::identity(n) + sym;
            let sigma = if n == 1 {
                linalg::smallest_singular_value(&m)
            } else {
                linalg::weighted_sigma_min(&m, &radii)
            };
            if sigma <= 1e-8 {
                return Err(ScatterError::NonInvertibleSymbol {
                    lambda: lambda_of(q),
                    sigma_min: sigma,
                });
            }
            Ok(linalg::invert(&m)? - linalg::identity(n))
        })
        .collect();
    let mut s_hat = Vec::with_capacity(big_n);
    let mut worst_symbol = (0.0, f64::INFINITY);
    for (q, r) in inverted.into_iter().enumerate() {
        let m = r?;
        // track σ_min via the inverse norm proxy (cheap scan for reporting)
        let inv_norm = linalg::norm_max(&m);
        if inv_norm.recip() < worst_symbol.1 {
            worst_symbol = (lambda_of(q), inv_norm.recip());
        }
        s_hat.push(m);
    }

    // Inverse transform to the lattice.
    let mut kernels = vec![DMatrix::zeros(n, n); big_n];
    {
        let columns: Vec<Vec<C64>> = (0..n * n)
            .into_par_iter()
            .map(|e| {
                let (i, j) = (e / n, e % n);
                let mut buf: Vec<C64> = (0..big_n)
                    .map(|q| {
                        s_hat[q][(i, j)]
                            * C64::from_polar(
                                1.0,
                                -2.0 * PI * (q as f64) * (m_half as f64) / big_n as f64,
                            )
                    })
                    .collect();
                ifft.process(&mut buf);
                let scale = 1.0 / (big_n as f64 * h);
                buf.iter_mut().for_each(|z| *z *= scale);
                buf
            })
            .collect();
        for (e, col) in columns.iter().enumerate() {
            let (i, j) = (e / n, e % n);
            for a in 0..big_n {
                kernels[a][(i, j)] = col[a];
            }
        }
    }
    let s = RhoKernelFamily::from_kernels(&t.line, &t.radial, -m_half, kernels);
    let s_norm = s.algebra_norm();

    // Two-sided residual in the algebra: (1+T)∗(1+S) - 1 = T + S + T∗S.
    let ts = convolve(t, &s)?;
    let st = convolve(&s, t)?;
    let right = t.sub(&s.sub(&ts).sub(t).sub(t)); // T + S + T∗S  (see below)
    // The expression above is awkward; compute directly instead.
    let _ = right;
    let residual_right = add3(t, &s, &ts).algebra_norm();
    let residual_left = add3(t, &s, &st).algebra_norm();

    Ok(WienerInverse {
        s,
        s_norm,
        residual_right,
        residual_left,
        worst_symbol,
    })
}

/// `a + b + c` with merged supports.
fn add3(a: &RhoKernelFamily, b: &RhoKernelFamily, c: &RhoKernelFamily) -> RhoKernelFamily {
    let neg_b = RhoKernelFamily {
        line: b.line.clone(),
        radial: b.radial.clone(),
        support_lo: b.support_lo,
        kernels: b.kernels.iter().map(|k| -k).collect(),
    };
    let neg_c = RhoKernelFamily {
        line: c.line.clone(),
        radial: c.radial.clone(),
        support_lo: c.support_lo,
        kernels: c.kernels.iter().map(|k| -k).collect(),
    };
    a.sub(&neg_b).sub(&neg_c)
}

/// Truncated Neumann series `Σ_{n=1}^{N} (-1)ⁿ T^{∗n}`.
pub fn neumann_series(t: &RhoKernelFamily, terms: usize) -> Result<RhoKernelFamily> {
    let mut power = t.clone();
    let mut acc = RhoKernelFamily {
        line: t.line.clone(),
        radial: t.radial.clone(),
        support_lo: t.support_lo,
        kernels: t.kernels.iter().map(|k| -k).collect(),
    };
    let mut sign = 1.0;
    for _ in 2..=terms {
        power = convolve(&power, t)?;
        let signed = RhoKernelFamily {
            line: power.line.clone(),
            radial: power.radial.clone(),
            support_lo: power.support_lo,
            kernels: power.kernels.iter().map(|k| k * C64::from(sign)).collect(),
        };
        acc = acc.sub(&RhoKernelFamily {
            line: signed.line.clone(),
            radial: signed.radial.clone(),
            support_lo: signed.support_lo,
            kernels: signed.kernels.iter().map(|k| -k).collect(),
        });
        sign = -sign;
    }
    Ok(acc)
}

/// Refinement screen for the symbol at each probe λ: σ_min of
/// `I + T̂⁻(λ)` across radial refinements; a trend toward zero flags the
/// frequency as non-invertible (the fixed σ-gate cannot see a continuum
/// zero mode on one grid).
pub fn symbol_singularity_scan(
    v: &Potential,
    r_max: f64,
    levels: &[usize],
    lambda_grid: &[f64],
) -> Result<Vec<(f64, Vec<f64>, bool)>> {
    let mut per_lambda: Vec<Vec<f64>> = vec![Vec::new(); lambda_grid.len()];
    for &n in levels {
        let radial = RadialGrid::new(r_max, n);
        let line = LineGrid::lattice(2 * n + 8, radial.spacing());
        let t = build_t_minus(v, &radial, &line)?;
        let radii = radial.nodes().to_vec();
        for (li, &lam) in lambda_grid.iter().enumerate() {
            let sym = t.continuum_symbol(lam);
            let m = linalg::identity(n) + sym;
            per_lambda[li].push(linalg::weighted_sigma_min(&m, &radii));
        }
    }
    // Slope of log₂ σ_min per grid doubling.
    let doublings: f64 = levels
        .windows(2)
        .map(|w| (w[1] as f64 / w[0] as f64).log2())
        .sum();
    Ok(lambda_grid
        .iter()
        .zip(per_lambda)
        .map(|(&lam, trace)| {
            let slope: f64 = trace
                .windows(2)
                .map(|w| (w[1] / w[0]).log2())
                .sum::<f64>()
                / doublings;
            let singular = slope < -0.25;
            (lam, trace, singular)
        })
        .collect())
}

/// [`wiener_invert`] preceded by the refinement screen at the probe
/// frequencies; raises [`ScatterError::NonInvertibleSymbol`] at the first
/// flagged λ.
pub fn wiener_invert_checked(
    t: &RhoKernelFamily,
    v: &Potential,
    scan_levels: &[usize],
    lambda_probes: &[f64],
) -> Result<WienerInverse> {
    let scan = symbol_singularity_scan(v, t.radial.r_max(), scan_levels, lambda_probes)?;
    for (lam, trace, singular) in &scan {
        if *singular {
            return Err(ScatterError::NonInvertibleSymbol {
                lambda: *lam,
                sigma_min: *trace.last().unwrap(),
            });
        }
    }
    wiener_invert(t)
}

// ---------------------------------------------------------------------------
// scalar specialization
// ---------------------------------------------------------------------------

/// Scalar Wiener check: invert `δ₀ + f` for an integrable scalar `f` on the
/// lattice, through the same engine with 1×1 kernels.
#[derive(Debug, Clone)]
pub struct ScalarWienerResult {
    pub g: Vec<C64>,
    pub support_lo: i64,
    /// `‖(δ₀+f)∗(δ₀+g) - δ₀‖₁` on the lattice.
    pub residual: f64,
    pub min_symbol_modulus: f64,
}

pub fn scalar_wiener_check(
    line: &Arc<LineGrid>,
    f_samples: &[C64],
    support_lo: i64,
) -> Result<ScalarWienerResult> {
    let radial = RadialGrid::new(1.0, 1);
    let kernels: Vec<DMatrix<C64>> = f_samples
        .iter()
        .map(|&z| DMatrix::from_element(1, 1, z))
        .collect();
    let fam = RhoKernelFamily::from_kernels(line, &radial, support_lo, kernels);
    // Scalar symbols admit a sharper vanishing test than the per-node σ
    // gate: scan 1 + f̂ on a fine frequency grid and flag any segment of
    // the symbol curve passing through 0 (a transversal crossing between
    // dual nodes would otherwise be missed).
    {
        let h = line.spacing();
        let n_fine = 8 * line.len();
        let mut prev: Option<(f64, C64)> = None;
        let mut scale = 0.0_f64;
        let mut worst: Option<(f64, f64)> = None;
        for i in 0..=n_fine {
            let lam = -PI / h + 2.0 * PI / h * i as f64 / n_fine as f64;
            let s = C64::new(1.0, 0.0) + fam.symbol_unchecked(lam)[(0, 0)];
            scale = scale.max(s.norm());
            if let Some((plam, ps)) = prev {
                // distance from the origin to the segment ps → s
                let d = s - ps;
                let t = if d.norm_sqr() > 0.0 {
                    (-(ps.re * d.re + ps.im * d.im) / d.norm_sqr()).clamp(0.0, 1.0)
                } else {
                    0.0
                };
                let nearest = ps + d * t;
                let dist = nearest.norm();
                if worst.map(|w| dist < w.1).unwrap_or(true) {
                    worst = Some((plam + t * (lam - plam), dist));
                }
            }
            prev = Some((lam, s));
        }
        if let Some((lam0, dist)) = worst {
            if dist <= 1e-6 * scale.max(1e-300) {
                return Err(ScatterError::NonInvertibleSymbol {
                    lambda: lam0,
                    sigma_min: dist,
                });
            }
        }
    }
    match wiener_invert(&fam) {
        Ok(inv) => {
            let g = inv.s.kernels.iter().map(|k| k[(0, 0)]).collect();
            Ok(ScalarWienerResult {
                g,
                support_lo: inv.s.support_lo,
                residual: inv.residual_right,
                min_symbol_modulus: inv.worst_symbol.1,
            })
        }
        Err(e) => Err(e),
    }
}

/// Seeded random family on a lattice window (for the algebra-axiom
/// property checks).
pub fn random_family(
    line: &Arc<LineGrid>,
    radial: &Arc<RadialGrid>,
    seed: u64,
    support: i64,
    scale: f64,
) -> RhoKernelFamily {
    use rand::Rng;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let n = radial.len();
    let kernels: Vec<DMatrix<C64>> = (0..(2 * support + 1))
        .map(|_| {
            DMatrix::from_fn(n, n, |_, _| {
                C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5) * (scale / n as f64)
            })
        })
        .collect();
    RhoKernelFamily::from_kernels(line, radial, -support, kernels)
}

/// The Birman-Schwinger cross-identity matrix `V R₀⁻(λ²)` on the same
/// discretization (for the symbol comparison).
pub fn vr0_reference(
    radial: &Arc<RadialGrid>,
    v: &Potential,
    lambda: f64,
) -> DMatrix<C64> {
    crate::birman::vr0_kernel(radial, v, lambda, Branch::Minus, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;

    #[test]
    fn zero_family_and_unit() {
        let radial = RadialGrid::new(6.0, 12);
        let line = LineGrid::new(8.0, 33);
        let z = RhoKernelFamily::zero(&line, &radial);
        assert_eq!(z.algebra_norm(), 0.0);
        // δ-like unit: kernel I/h at ρ = 0 acts as the convolution identity.
        let n = radial.len();
        let unit = RhoKernelFamily::from_kernels(
            &line,
            &radial,
            0,
            vec![linalg::identity(n) / C64::from(line.spacing())],
        );
        let t = random_family(&line, &radial, 5, 4, 0.7);
        let left = convolve(&unit, &t).unwrap();
        let right = convolve(&t, &unit).unwrap();
        let dl = left.sub(&t).algebra_norm();
        let dr = right.sub(&t).algebra_norm();
        assert!(dl < 1e-10 && dr < 1e-10, "unit defects {dl}, {dr}");
    }

    #[test]
    fn algebra_axioms_on_random_families() {
        let radial = RadialGrid::new(6.0, 10);
        let line = LineGrid::new(10.0, 41);
        for seed in 0..10u64 {
            let a = random_family(&line, &radial, 3 * seed + 1, 3, 0.8);
            let b = random_family(&line, &radial, 3 * seed + 2, 4, 0.6);
            let c = random_family(&line, &radial, 3 * seed + 3, 2, 0.9);
            // Associativity.
            let ab_c = convolve(&convolve(&a, &b).unwrap(), &c).unwrap();
            let a_bc = convolve(&a, &convolve(&b, &c).unwrap()).unwrap();
            let assoc = ab_c.sub(&a_bc).algebra_norm()
                / ab_c.algebra_norm().max(1e-300);
            assert!(assoc < 1e-8, "associativity defect {assoc}");
            // Submultiplicativity.
            let ab = convolve(&a, &b).unwrap();
            assert!(
                ab.algebra_norm() <= a.algebra_norm() * b.algebra_norm() * (1.0 + 1e-12),
                "submultiplicativity violated"
            );
            // Fourier homomorphism at a few frequencies.
            for &lam in &[0.0, 0.3, 1.1] {
                let lhs = ab.symbol(lam).unwrap();
                let rhs = a.symbol(lam).unwrap() * b.symbol(lam).unwrap();
                let err = linalg::norm_max(&(lhs - &rhs)) / linalg::norm_max(&rhs).max(1e-300);
                assert!(err < 1e-8, "homomorphism defect {err} at λ = {lam}");
            }
        }
    }

    #[test]
    fn symbol_norm_bound() {
        let radial = RadialGrid::new(6.0, 10);
        let line = LineGrid::new(10.0, 41);
        let mu = {
            let h = radial.spacing();
            radial
                .nodes()
                .iter()
                .map(|&r| 4.0 * PI * r * r * h)
                .collect::<Vec<_>>()
        };
        for seed in 0..10u64 {
            let t = random_family(&line, &radial, seed + 100, 5, 1.0);
            let norm = t.algebra_norm();
            for &lam in &[0.0, 0.4, 0.9] {
                let sym = t.symbol(lam).unwrap();
                assert!(
                    linalg::norm_l1_op(&sym, &mu) <= norm * (1.0 + 1e-12),
                    "sup_λ ‖T̂‖ exceeds the algebra norm"
                );
            }
        }
    }

    #[test]
    fn t_minus_radial_reduction_matches_angular_quadrature() {
        // Continuum check of the spherical-mean reduction formula against
        // 3D angular quadrature on random (r, ρ) pairs.
        let v = Potential::gaussian(0.7, 1.0);
        let f = |u: f64| (-0.3 * (u - 1.2) * (u - 1.2)).exp();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for _ in 0..10 {
            let r = 0.4 + 3.0 * rng.random::<f64>();
            let rho = 0.3 + 2.5 * rng.random::<f64>();
            let reduced = t_minus_apply_continuum(&v, rho, r, f);
            // (4πρ)⁻¹ V(r) ∫_{|x-y|=ρ} f(|y|) dσ(y), |x| = r: the surface
            // integral is 2πρ² ∫ f(√(r²+ρ²-2rρμ)) dμ.
            let n = 200_000;
            let mut acc = 0.0;
            for k in 0..n {
                let mu = -1.0 + 2.0 * (k as f64 + 0.5) / n as f64;
                let d = (r * r + rho * rho - 2.0 * r * rho * mu).max(0.0).sqrt();
                acc += f(d) * (2.0 / n as f64);
            }
            let surface = 2.0 * PI * rho * rho * acc;
            let direct = v.eval(r) / (4.0 * PI * rho) * surface;
            assert!(
                (reduced - direct).abs() <= 5e-8 * direct.abs().max(1e-8),
                "reduction {reduced} vs 3D {direct}"
            );
        }
    }

    #[test]
    fn t_minus_norm_bound_and_symbol_identity() {
        let radial = RadialGrid::new(12.0, 48);
        let h = radial.spacing();
        let line = LineGrid::lattice(2 * 48 + 8, h);
        let v = Potential::gaussian(0.5, 1.0);
        let t = build_t_minus(&v, &radial, &line).unwrap();
        // Algebra norm against (4π)⁻¹‖V‖_𝒦.
        let bound = crate::potentials::kato_norm(&v).unwrap().value / (4.0 * PI);
        let norm = t.algebra_norm();
        assert!(
            norm <= bound * 1.05 && norm >= bound * 0.9,
            "‖T⁻‖ = {norm} vs (4π)⁻¹‖V‖_𝒦 = {bound}"
        );
        // Cell-exact symbol equals V R₀⁻(λ²) on the same grid.
        for &lam in &[0.0, 0.5, 1.0, 2.0] {
            let sym = t.continuum_symbol(lam);
            let reference = vr0_reference(&radial, &v, lam);
            let err = linalg::norm_max(&(sym - &reference))
                / linalg::norm_max(&reference).max(1e-300);
            assert!(err <= 1e-6, "symbol mismatch {err} at λ = {lam}");
        }
    }

    #[test]
    fn wiener_inversion_small_gaussian() {
        let radial = RadialGrid::new(12.0, 48);
        let h = radial.spacing();
        // Window sized for the exponential decay of the inverse.
        let half_nodes = 800i64;
        let line = LineGrid::lattice(half_nodes as usize, h);
        let v = Potential::gaussian(0.5, 1.0);
        let t = build_t_minus(&v, &radial, &line).unwrap();
        let inv = wiener_invert(&t).unwrap();
        assert!(
            inv.residual_right <= 1e-6 && inv.residual_left <= 1e-6,
            "residuals {} / {}",
            inv.residual_right,
            inv.residual_left
        );
        // Neumann-series agreement.
        let neumann = neumann_series(&t, 8).unwrap();
        let diff = inv.s.sub(&neumann).algebra_norm();
        assert!(diff <= 1e-5, "Neumann agreement {diff}");
    }

    #[test]
    fn wiener_diagnostics_trends() {
        let radial = RadialGrid::new(12.0, 48);
        let h = radial.spacing();
        let line = LineGrid::lattice(208, h);
        let v = Potential::gaussian(0.5, 1.0);
        let t = build_t_minus(&v, &radial, &line).unwrap();
        let d = diagnostics(&t, &[0.0, 0.5, 1.0]).unwrap();
        // Tail mass non-increasing.
        for w in d.tail_mass.windows(2) {
            assert!(w[1].1 <= w[0].1 + 1e-12);
        }
        // Continuity modulus decreasing toward δ → 0 with positive rate.
        assert!(d.modulus_rate > 0.0, "modulus rate {}", d.modulus_rate);
        let m = &d.continuity_modulus;
        assert!(m[m.len() - 1].1 < m[0].1);
        for &(_, sigma) in &d.symbol_sigma_min {
            assert!(sigma > 0.1);
        }
    }

    #[test]
    fn resonant_symbol_flagged_at_zero_frequency() {
        let v = crate::potentials::aubin_talenti(1.0, &RadialGrid::new(1.0, 2)).potential;
        let scan = symbol_singularity_scan(&v, 40.0, &[64, 96, 128], &[0.0, 0.5, 1.0]).unwrap();
        let zero = &scan[0];
        assert!(zero.2, "λ = 0 not flagged: trace {:?}", zero.1);
        for entry in &scan[1..] {
            assert!(!entry.2, "λ = {} wrongly flagged: {:?}", entry.0, entry.1);
        }
        // wiener_invert_checked raises NonInvertibleSymbol near λ = 0.
        let radial = RadialGrid::new(40.0, 64);
        let h = radial.spacing();
        let line = LineGrid::lattice(2 * 64 + 8, h);
        let t = build_t_minus(&v, &radial, &line).unwrap();
        match wiener_invert_checked(&t, &v, &[64, 96, 128], &[0.0, 0.5, 1.0]) {
            Err(ScatterError::NonInvertibleSymbol { lambda, .. }) => {
                assert!(lambda.abs() < 1e-12)
            }
            other => panic!("expected NonInvertibleSymbol, got {:?}", other.map(|i| i.s_norm)),
        }
    }

    #[test]
    fn scalar_wiener_examples() {
        let line = LineGrid::new(30.0, 601);
        let h = line.spacing();
        // f = 0 → g = 0.
        let z = scalar_wiener_check(&line, &vec![C64::new(0.0, 0.0); 1], 0).unwrap();
        assert!(z.g.iter().all(|x| x.norm() < 1e-14));

        // Narrow Gaussian with ‖f‖₁ = 0.5: symbol bounded away from zero.
        let width = 0.8;
        let support = 40i64;
        let samples: Vec<C64> = (-support..=support)
            .map(|k| {
                let x = k as f64 * h;
                C64::new((-x * x / (width * width)).exp(), 0.0)
            })
            .collect();
        let mass: f64 = samples.iter().map(|z| z.re).sum::<f64>() * h;
        let f: Vec<C64> = samples.iter().map(|z| z * (0.5 / mass)).collect();
        let res = scalar_wiener_check(&line, &f, -support).unwrap();
        assert!(res.residual <= 1e-8, "scalar residual {}", res.residual);
        assert!(res.min_symbol_modulus > 0.4);

        // Amplitude continuation until 1 + f̂ crosses zero: scaling the
        // negative of f by c > 2 forces f̂(0) = -c/2 < -1.
        let f_bad: Vec<C64> = f.iter().map(|z| z * (-2.4)).collect();
        match scalar_wiener_check(&line, &f_bad, -support) {
            Err(ScatterError::NonInvertibleSymbol { lambda, .. }) => {
                // 1 + f̂ = 0 where e^{-w²λ²/4} = 1/1.2: λ₀ = ±1.0675 for w = 0.8.
                let expected = (1.2f64.ln() / (0.8 * 0.8 / 4.0)).sqrt();
                assert!(
                    (lambda.abs() - expected).abs() < 0.05,
                    "zero located at λ = {lambda}, expected ±{expected:.4}"
                );
            }
            other => panic!("expected NonInvertibleSymbol, got {other:?}"),
        }
    }
}
