//! Fast transforms: the discrete sine transform diagonalizing `-d²/dr²`
//! with Dirichlet conditions on the radial midpoint grid, and the periodic
//! Fourier transform on the symmetric line grid.

use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::error::{Result, ScatterError};
use crate::numerics::{LineGrid, RadialGrid};
use crate::C64;

/// Sine transform on the midpoint grid: expansion in `sin(mπr/r_max)`,
/// `m = 1..n`, which are exact discrete eigenvectors of the Dirichlet
/// Laplacian on `[0, r_max]`.
///
/// Both directions are evaluated through one complex FFT of length `4n`.
pub struct SineTransform {
    n: usize,
    r_max: f64,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl SineTransform {
    pub fn new(grid: &RadialGrid) -> Self {
        let n = grid.len();
        let mut planner = FftPlanner::new();
        Self {
            n,
            r_max: grid.r_max(),
            fwd: planner.plan_fft_forward(4 * n),
            inv: planner.plan_fft_inverse(4 * n),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    /// Continuum frequency of mode `m` (1-based): `k_m = mπ/r_max`.
    pub fn frequency(&self, m: usize) -> f64 {
        (m as f64) * std::f64::consts::PI / self.r_max
    }

    /// Raw sine sums `S_m = Σ_i u_i sin(π(i+1/2)m/n)`, `m = 1..n`.
    pub fn forward_raw(&self, u: &[C64]) -> Vec<C64> {
        assert_eq!(u.len(), self.n);
        let n = self.n;
        let mut buf = vec![C64::new(0.0, 0.0); 4 * n];
        for (i, &ui) in u.iter().enumerate() {
            buf[2 * i + 1] = ui;
            buf[4 * n - 1 - 2 * i] = -ui;
        }
        self.fwd.process(&mut buf);
        (1..=n).map(|m| buf[m] * C64::new(0.0, 0.5)).collect()
    }

    /// Evaluate `u_i = Σ_m c_m sin(π(i+1/2)m/n)` from raw-style coefficients.
    fn synthesize(&self, c: &[C64]) -> Vec<C64> {
        assert_eq!(c.len(), self.n);
        let n = self.n;
        let mut buf = vec![C64::new(0.0, 0.0); 4 * n];
        for (m, &cm) in c.iter().enumerate() {
            let m1 = m + 1;
            buf[m1] = cm * C64::new(0.0, -0.5);
            buf[4 * n - m1] = cm * C64::new(0.0, 0.5);
        }
        self.inv.process(&mut buf);
        (0..n).map(|i| buf[2 * i + 1]).collect()
    }

    /// Inverse of [`forward_raw`]: divides by the basis norms
    /// (`n/2` for `m < n`, `n` for `m = n`) and synthesizes.
    pub fn inverse_raw(&self, s: &[C64]) -> Vec<C64> {
        let n = self.n;
        let mut c: Vec<C64> = s.iter().map(|&z| z * (2.0 / n as f64)).collect();
        c[n - 1] *= 0.5;
        self.synthesize(&c)
    }

    /// Orthonormal spectral coefficients, normalized so that Parseval holds
    /// against the grid quadrature: `Σ_i |u_i|² h = Σ_m |c_m|²`.
    ///
    /// Data is expected to vanish at `r_max`; mass in the outermost 2% of
    /// nodes above `boundary_tol` (relative to the total) is reported as a
    /// warning flag in the result.
    pub fn spectral(&self, u: &[C64], h: f64, boundary_tol: f64) -> (Vec<C64>, bool) {
        let n = self.n;
        let total: f64 = u.iter().map(|z| z.norm_sqr()).sum::<f64>();
        let edge_nodes = (n / 50).max(1);
        let edge: f64 = u[n - edge_nodes..].iter().map(|z| z.norm_sqr()).sum();
        let flagged = total > 0.0 && edge / total > boundary_tol;
        let raw = self.forward_raw(u);
        let mut c: Vec<C64> = raw
            .iter()
            .map(|&z| z * (2.0 * h / n as f64).sqrt())
            .collect();
        c[n - 1] = raw[n - 1] * (h / n as f64).sqrt();
        (c, flagged)
    }

    /// Inverse of [`spectral`].
    pub fn from_spectral(&self, c: &[C64], h: f64) -> Vec<C64> {
        let n = self.n;
        let mut raw: Vec<C64> = c
            .iter()
            .map(|&z| z / (2.0 * h / n as f64).sqrt())
            .collect();
        raw[n - 1] = c[n - 1] / (h / n as f64).sqrt();
        self.inverse_raw(&raw)
    }

    /// Apply a diagonal spectral multiplier `m ↦ φ(k_m)` to sampled data.
    pub fn apply_multiplier<F: Fn(f64) -> C64>(&self, u: &[C64], phi: F) -> Vec<C64> {
        let mut s = self.forward_raw(u);
        for (m, z) in s.iter_mut().enumerate() {
            *z *= phi(self.frequency(m + 1));
        }
        self.inverse_raw(&s)
    }
}

/// Periodic Fourier transform on the symmetric [`LineGrid`].
pub struct LineFourier {
    n: usize,
    h: f64,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl LineFourier {
    pub fn new(grid: &LineGrid) -> Self {
        let n = grid.len();
        let mut planner = FftPlanner::new();
        Self {
            n,
            h: grid.spacing(),
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
        }
    }

    /// Signed frequency of DFT bin `k`: `ξ_k = 2πk̃/(nh)`.
    pub fn frequency(&self, k: usize) -> f64 {
        let n = self.n as i64;
        let k = k as i64;
        let signed = if k <= (n - 1) / 2 { k } else { k - n };
        2.0 * std::f64::consts::PI * signed as f64 / (self.n as f64 * self.h)
    }

    pub fn forward(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.n);
        let mut buf = x.to_vec();
        self.fwd.process(&mut buf);
        buf
    }

    pub fn inverse(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.n);
        let mut buf = x.to_vec();
        self.inv.process(&mut buf);
        let scale = 1.0 / self.n as f64;
        buf.iter_mut().for_each(|z| *z *= scale);
        buf
    }

    /// Apply a spectral multiplier `ξ ↦ φ(ξ)`.
    pub fn apply_multiplier<F: Fn(f64) -> C64>(&self, x: &[C64], phi: F) -> Vec<C64> {
        let mut s = self.forward(x);
        for (k, z) in s.iter_mut().enumerate() {
            *z *= phi(self.frequency(k));
        }
        self.inverse(&s)
    }
}

/// Guard for transforms of oscillatory symbols: node spacing must resolve
/// the highest requested frequency.
pub fn check_sampling(spacing: f64, max_frequency: f64) -> Result<()> {
    let limit = std::f64::consts::PI / (4.0 * max_frequency.abs().max(1e-300));
    if max_frequency != 0.0 && spacing > limit {
        return Err(ScatterError::Undersampled { spacing, limit });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian_packet(grid: &RadialGrid) -> Vec<C64> {
        grid.nodes()
            .iter()
            .map(|&r| C64::new((-(r - 8.0) * (r - 8.0)).exp(), 0.3 * (-(r - 8.0) * (r - 8.0) / 2.0).exp()))
            .collect()
    }

    #[test]
    fn pure_mode_gives_single_coefficient() {
        let grid = RadialGrid::new(20.0, 128);
        let st = SineTransform::new(&grid);
        let u: Vec<C64> = grid
            .nodes()
            .iter()
            .map(|&r| C64::new((std::f64::consts::PI * r / 20.0).sin(), 0.0))
            .collect();
        let s = st.forward_raw(&u);
        assert!(s[0].norm() > 1.0);
        for m in 1..128 {
            assert!(s[m].norm() < 1e-10 * s[0].norm(), "mode {m} leaked");
        }
    }

    #[test]
    fn round_trip_identity() {
        let grid = RadialGrid::new(20.0, 256);
        let st = SineTransform::new(&grid);
        let u = gaussian_packet(&grid);
        let back = st.inverse_raw(&st.forward_raw(&u));
        let err: f64 = u
            .iter()
            .zip(&back)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-12, "round trip error {err}");
    }

    #[test]
    fn parseval_holds_for_spectral_normalization() {
        let grid = RadialGrid::new(20.0, 256);
        let st = SineTransform::new(&grid);
        let u = gaussian_packet(&grid);
        let (c, flagged) = st.spectral(&u, grid.spacing(), 1e-8);
        assert!(!flagged);
        let lhs: f64 = u.iter().map(|z| z.norm_sqr()).sum::<f64>() * grid.spacing();
        let rhs: f64 = c.iter().map(|z| z.norm_sqr()).sum();
        assert!((lhs - rhs).abs() < 1e-10 * lhs);
        let back = st.from_spectral(&c, grid.spacing());
        let err: f64 = u.iter().zip(&back).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-12);
    }

    #[test]
    fn boundary_mass_is_flagged() {
        let grid = RadialGrid::new(20.0, 128);
        let st = SineTransform::new(&grid);
        let u: Vec<C64> = grid
            .nodes()
            .iter()
            .map(|&r| C64::new((-(r - 19.9) * (r - 19.9)).exp(), 0.0))
            .collect();
        let (_, flagged) = st.spectral(&u, grid.spacing(), 1e-8);
        assert!(flagged);
    }

    #[test]
    fn line_fourier_round_trip_and_parseval() {
        let grid = LineGrid::new(15.0, 405);
        let lf = LineFourier::new(&grid);
        let x: Vec<C64> = grid
            .nodes()
            .map(|t| C64::new((-t * t / 3.0).exp() * (1.3 * t).cos(), (-t * t / 5.0).exp()))
            .collect();
        let back = lf.inverse(&lf.forward(&x));
        let err: f64 = x.iter().zip(&back).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-12);
        let lhs: f64 = x.iter().map(|z| z.norm_sqr()).sum::<f64>() * grid.spacing();
        let xf = lf.forward(&x);
        let rhs: f64 =
            xf.iter().map(|z| z.norm_sqr()).sum::<f64>() * grid.spacing() / grid.len() as f64;
        assert!((lhs - rhs).abs() < 1e-10 * lhs);
    }
}
