//! Dense and tridiagonal linear algebra helpers shared by the kernel modules.
//!
//! Dense factorizations are delegated to nalgebra; the pieces nalgebra does
//! not provide directly (smallest singular values via inverse power
//! iteration, Sturm-sequence eigenvalue counts for the radial Hamiltonian)
//! are implemented here.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, ScatterError};
use crate::C64;

/// Max-row-sum norm: the operator norm on discretized `L^∞`.
pub fn norm_inf_op(a: &DMatrix<C64>) -> f64 {
    (0..a.nrows())
        .map(|i| (0..a.ncols()).map(|j| a[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Weighted max-column-sum norm: the operator norm on discretized `L¹`
/// with node weights `mu` (so column `j` is scaled by `mu_i / mu_j`).
pub fn norm_l1_op(a: &DMatrix<C64>, mu: &[f64]) -> f64 {
    assert_eq!(a.nrows(), mu.len());
    assert_eq!(a.ncols(), mu.len());
    (0..a.ncols())
        .map(|j| {
            (0..a.nrows())
                .map(|i| a[(i, j)].norm() * mu[i])
                .sum::<f64>()
                / mu[j]
        })
        .fold(0.0, f64::max)
}

/// Largest entry modulus.
pub fn norm_max(a: &DMatrix<C64>) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn identity(n: usize) -> DMatrix<C64> {
    DMatrix::identity(n, n)
}

/// Dense inverse through LU with partial pivoting.
///
/// Fails when the matrix is numerically singular. The caller is expected to
/// have screened near-singular cases through [`smallest_singular_value`].
pub fn invert(a: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    a.clone().lu().try_inverse().ok_or_else(|| {
        ScatterError::Precondition("LU inversion failed: matrix is singular".into())
    })
}

/// Smallest singular value by inverse power iteration on `A^H A`.
///
/// Each iteration solves `A y = x` and `A^H z = y` through one LU
/// factorization of `A`, so the cost after the factorization is `O(n²)` per
/// step. Returns 0 when `A` is numerically singular (LU solve produces
/// non-finite entries).
pub fn smallest_singular_value(a: &DMatrix<C64>) -> f64 {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    let lu = a.clone().lu();
    let lu_h = a.adjoint().lu();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut x = DVector::from_fn(n, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    x /= C64::from(x.norm());
    let mut inv_sq = 0.0_f64;
    for _ in 0..60 {
        let y = match lu.solve(&x) {
            Some(y) => y,
            None => return 0.0,
        };
        let z = match lu_h.solve(&y) {
            Some(z) => z,
            None => return 0.0,
        };
        let nz = z.norm();
        if !nz.is_finite() || nz == 0.0 {
            return 0.0;
        }
        let new_inv_sq = nz;
        let rel = (new_inv_sq - inv_sq).abs() / new_inv_sq.max(1e-300);
        x = z / C64::from(nz);
        inv_sq = new_inv_sq;
        if rel < 1e-12 {
            break;
        }
    }
    if inv_sq == 0.0 {
        f64::INFINITY
    } else {
        inv_sq.powf(-0.5)
    }
}

/// Smallest singular value of `D A D⁻¹` with `D = diag(weights)` — the
/// natural detector when the matrix acts on samples of a function whose
/// physical norm carries the node weights.
pub fn weighted_sigma_min(a: &DMatrix<C64>, weights: &[f64]) -> f64 {
    let n = a.nrows();
    assert_eq!(weights.len(), n);
    let m = DMatrix::from_fn(n, n, |i, j| a[(i, j)] * (weights[i] / weights[j]));
    smallest_singular_value(&m)
}

/// Largest singular value by power iteration on `A^H A`.
pub fn largest_singular_value(a: &DMatrix<C64>) -> f64 {
    let n = a.ncols();
    let mut rng = ChaCha8Rng::seed_from_u64(0x51ee);
    let mut x = DVector::from_fn(n, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    x /= C64::from(x.norm());
    let mut sq = 0.0_f64;
    for _ in 0..300 {
        let y = a * &x;
        let z = a.adjoint() * y;
        let nz = z.norm();
        if nz == 0.0 {
            return 0.0;
        }
        let rel = (nz - sq).abs() / nz;
        x = z / C64::from(nz);
        sq = nz;
        if rel < 1e-12 {
            break;
        }
    }
    sq.sqrt()
}

/// Condition estimate `σ_max / σ_min` for the singularity screen.
pub fn condition_estimate(a: &DMatrix<C64>) -> f64 {
    let smin = smallest_singular_value(a);
    if smin == 0.0 {
        return f64::INFINITY;
    }
    largest_singular_value(a) / smin
}

/// Number of eigenvalues of the symmetric tridiagonal matrix
/// `tridiag(off, diag, off)` that are strictly below `shift`,
/// counted through the Sturm sequence of the `LDLᵀ` recursion.
pub fn tridiag_count_below(diag: &[f64], off: &[f64], shift: f64) -> usize {
    assert_eq!(off.len() + 1, diag.len());
    let mut count = 0usize;
    let mut d = diag[0] - shift;
    if d < 0.0 {
        count += 1;
    }
    for i in 1..diag.len() {
        let mut denom = d;
        if denom == 0.0 {
            denom = 1e-300;
        }
        d = (diag[i] - shift) - off[i - 1] * off[i - 1] / denom;
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// Eigenvalues of the symmetric tridiagonal matrix below `upper`, by
/// bisection on the Sturm count. Returns them in increasing order.
pub fn tridiag_eigenvalues_below(diag: &[f64], off: &[f64], upper: f64) -> Vec<f64> {
    let n_below = tridiag_count_below(diag, off, upper);
    if n_below == 0 {
        return Vec::new();
    }
    // Gershgorin lower bound.
    let mut lo = f64::INFINITY;
    for i in 0..diag.len() {
        let mut r = 0.0;
        if i > 0 {
            r += off[i - 1].abs();
        }
        if i < off.len() {
            r += off[i].abs();
        }
        lo = lo.min(diag[i] - r);
    }
    (0..n_below)
        .map(|k| {
            // k-th eigenvalue (0-based) below `upper`.
            let (mut a, mut b) = (lo, upper);
            for _ in 0..160 {
                let mid = 0.5 * (a + b);
                if tridiag_count_below(diag, off, mid) > k {
                    b = mid;
                } else {
                    a = mid;
                }
                if b - a < 1e-14 * (1.0 + b.abs()) {
                    break;
                }
            }
            0.5 * (a + b)
        })
        .collect()
}

/// Eigenvector of the symmetric tridiagonal matrix for an eigenvalue
/// estimate `ev`, by shifted inverse iteration (Thomas solves).
pub fn tridiag_eigenvector(diag: &[f64], off: &[f64], ev: f64) -> Vec<f64> {
    let n = diag.len();
    let shift = ev + 1e-12 * (1.0 + ev.abs());
    let mut rng = ChaCha8Rng::seed_from_u64(0xe16e);
    let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    normalize(&mut v);
    for _ in 0..8 {
        v = tridiag_solve_shifted(diag, off, shift, &v);
        normalize(&mut v);
    }
    // Fix the overall sign so results are deterministic.
    if let Some(m) = v
        .iter()
        .cloned()
        .enumerate()
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
    {
        if m.1 < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
    v
}

fn normalize(v: &mut [f64]) {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
}

fn tridiag_solve_shifted(diag: &[f64], off: &[f64], shift: f64, rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut denom = diag[0] - shift;
    if denom.abs() < 1e-300 {
        denom = 1e-300;
    }
    c[0] = if n > 1 { off[0] / denom } else { 0.0 };
    d[0] = rhs[0] / denom;
    for i in 1..n {
        let o = off[i - 1];
        let mut m = (diag[i] - shift) - o * c[i - 1];
        if m.abs() < 1e-300 {
            m = 1e-300;
        }
        c[i] = if i + 1 < n { off[i] / m } else { 0.0 };
        d[i] = (rhs[i] - o * d[i - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

/// Deterministic complex Gaussian-ish random matrix for property tests.
pub fn random_matrix(n: usize, seed: u64, scale: f64) -> DMatrix<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DMatrix::from_fn(n, n, |_, _| {
        C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5) * scale
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_of_shifted_identity() {
        let n = 24;
        let a = identity(n) * C64::new(2.0, 0.0);
        let inv = invert(&a).unwrap();
        assert!((norm_inf_op(&inv) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn singular_values_of_diagonal() {
        let mut a = identity(16);
        for i in 0..16 {
            a[(i, i)] = C64::new(1.0 + i as f64, 0.0);
        }
        assert!((smallest_singular_value(&a) - 1.0).abs() < 1e-9);
        assert!((largest_singular_value(&a) - 16.0).abs() < 1e-3);
    }

    #[test]
    fn sturm_count_matches_known_spectrum() {
        // -d²/dx² on (0,1) with Dirichlet ends, n interior points:
        // eigenvalues 4/h² sin²(kπh/2) with h = 1/(n+1).
        let n = 200;
        let h = 1.0 / (n as f64 + 1.0);
        let diag = vec![2.0 / (h * h); n];
        let off = vec![-1.0 / (h * h); n - 1];
        let ev3 = 4.0 / (h * h) * (3.0 * std::f64::consts::PI * h / 2.0).sin().powi(2);
        assert_eq!(tridiag_count_below(&diag, &off, ev3 + 1e-6), 3);
        let evs = tridiag_eigenvalues_below(&diag, &off, ev3 + 1e-6);
        assert_eq!(evs.len(), 3);
        assert!((evs[2] - ev3).abs() < 1e-6 * ev3);
        let v = tridiag_eigenvector(&diag, &off, evs[0]);
        // Ground state of the Dirichlet Laplacian is sin(πx).
        let exact: Vec<f64> = (1..=n).map(|i| (std::f64::consts::PI * i as f64 * h).sin()).collect();
        let nex = exact.iter().map(|x| x * x).sum::<f64>().sqrt();
        let dot: f64 = v.iter().zip(&exact).map(|(a, b)| a * b / nex).sum();
        assert!(dot.abs() > 1.0 - 1e-8);
    }
}
