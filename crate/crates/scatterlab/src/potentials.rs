//! Test potentials and the potential norms used by the kernel modules:
//! the Kato norm `‖V‖_𝒦 = ‖ |x|⁻¹ ∗ |V| ‖_∞`, the dyadic norms `B^β` and
//! `Y`, and the local maximal quantity `M_q` with an outer `L^p` norm.
//!
//! Potentials are stored as closed forms (plus raw tables for the CSV kind)
//! and sampled on demand; norm integrals are evaluated from the closed form
//! with composite Gauss-Legendre panels and dyadic tail extrapolation.

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::{Result, ScatterError};
use crate::numerics::{gauss_legendre_on, RadialGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Dimension {
    Radial3,
    Line1,
}

#[derive(Debug, Clone, Serialize)]
pub enum PotentialKind {
    Gaussian { amplitude: f64, scale: f64 },
    Yukawa { amplitude: f64, scale: f64 },
    /// `V = -5 W_λ⁴` with `W_λ(x) = λ^{1/2} W(λx)`, `W(x) = (1+|x|²/3)^{-1/2}`.
    AubinTalentiLinearization { lambda: f64 },
    Table { rs: Vec<f64>, vs: Vec<f64> },
}

/// Real radial (or 1D even) potential profile.
#[derive(Debug, Clone, Serialize)]
pub struct Potential {
    pub kind: PotentialKind,
    pub dimension: Dimension,
}

/// `W(r) = (1 + r²/3)^{-1/2}`.
pub fn aubin_talenti_w(r: f64) -> f64 {
    (1.0 + r * r / 3.0).powf(-0.5)
}

fn aubin_talenti_w_prime(r: f64) -> f64 {
    -(r / 3.0) * (1.0 + r * r / 3.0).powf(-1.5)
}

impl Potential {
    pub fn gaussian(amplitude: f64, scale: f64) -> Self {
        assert!(scale > 0.0);
        Self {
            kind: PotentialKind::Gaussian { amplitude, scale },
            dimension: Dimension::Radial3,
        }
    }

    pub fn yukawa(amplitude: f64, scale: f64) -> Self {
        assert!(scale > 0.0);
        Self {
            kind: PotentialKind::Yukawa { amplitude, scale },
            dimension: Dimension::Radial3,
        }
    }

    pub fn zero() -> Self {
        Self::gaussian(0.0, 1.0)
    }

    pub fn from_table(rs: Vec<f64>, vs: Vec<f64>) -> Self {
        assert_eq!(rs.len(), vs.len());
        Self {
            kind: PotentialKind::Table { rs, vs },
            dimension: Dimension::Radial3,
        }
    }

    /// Load a tabulated potential from two-column CSV `(r, V(r))`.
    /// A header line is required.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let mut lines = text.lines().enumerate();
        let Some((_, header)) = lines.next() else {
            return Err(ScatterError::CsvParse {
                line: 1,
                msg: "empty file".into(),
            });
        };
        if header.split(',').any(|tok| tok.trim().parse::<f64>().is_ok()) {
            return Err(ScatterError::CsvParse {
                line: 1,
                msg: "missing header line".into(),
            });
        }
        let mut rs = Vec::new();
        let mut vs = Vec::new();
        for (idx, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let mut cols = line.split(',');
            let parse = |tok: Option<&str>| -> Result<f64> {
                tok.map(str::trim)
                    .and_then(|t| t.parse::<f64>().ok())
                    .ok_or(ScatterError::CsvParse {
                        line: idx + 1,
                        msg: format!("expected two numeric columns, got `{line}`"),
                    })
            };
            let r = parse(cols.next())?;
            let v = parse(cols.next())?;
            rs.push(r);
            vs.push(v);
        }
        if rs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(ScatterError::CsvParse {
                line: 0,
                msg: "radii must be strictly increasing".into(),
            });
        }
        Ok(Self::from_table(rs, vs))
    }

    pub fn eval(&self, r: f64) -> f64 {
        let r = r.abs();
        match &self.kind {
            PotentialKind::Gaussian { amplitude, scale } => {
                amplitude * (-(r / scale) * (r / scale)).exp()
            }
            PotentialKind::Yukawa { amplitude, scale } => {
                if r == 0.0 {
                    f64::INFINITY
                } else {
                    amplitude * (-r / scale).exp() / r
                }
            }
            PotentialKind::AubinTalentiLinearization { lambda } => {
                let w = aubin_talenti_w(lambda * r);
                -5.0 * lambda * lambda * w.powi(4)
            }
            PotentialKind::Table { rs, vs } => {
                if rs.is_empty() || r > *rs.last().unwrap() || r < rs[0] {
                    return 0.0;
                }
                let j = rs.partition_point(|&x| x < r).min(rs.len() - 1).max(1);
                let (r0, r1) = (rs[j - 1], rs[j]);
                let t = if r1 > r0 { (r - r0) / (r1 - r0) } else { 0.0 };
                vs[j - 1] * (1.0 - t) + vs[j] * t
            }
        }
    }

    pub fn sample(&self, grid: &RadialGrid) -> Vec<f64> {
        grid.nodes().iter().map(|&r| self.eval(r)).collect()
    }

    /// Scaled copy `c·V`.
    pub fn scaled(&self, c: f64) -> Self {
        let kind = match &self.kind {
            PotentialKind::Gaussian { amplitude, scale } => PotentialKind::Gaussian {
                amplitude: c * amplitude,
                scale: *scale,
            },
            PotentialKind::Yukawa { amplitude, scale } => PotentialKind::Yukawa {
                amplitude: c * amplitude,
                scale: *scale,
            },
            PotentialKind::AubinTalentiLinearization { .. } | PotentialKind::Table { .. } => {
                let rs: Vec<f64> = (0..4096).map(|i| i as f64 * 0.05).collect();
                let vs: Vec<f64> = rs.iter().map(|&r| c * self.eval(r)).collect();
                PotentialKind::Table { rs, vs }
            }
        };
        Self {
            kind,
            dimension: self.dimension,
        }
    }

    pub fn sup_abs(&self) -> f64 {
        match &self.kind {
            PotentialKind::Gaussian { amplitude, .. } => amplitude.abs(),
            PotentialKind::Yukawa { .. } => f64::INFINITY,
            PotentialKind::AubinTalentiLinearization { lambda } => 5.0 * lambda * lambda,
            PotentialKind::Table { vs, .. } => vs.iter().fold(0.0, |m, v| m.max(v.abs())),
        }
    }
}

/// Collected potential norms. Every entry is nonnegative; the zero
/// potential reports zeros throughout.
#[derive(Debug, Clone, Serialize)]
pub struct NormReport {
    pub l2: f64,
    pub p: f64,
    pub l_p: f64,
    pub kato: f64,
    pub beta: f64,
    pub b_beta: f64,
    pub y_norm: f64,
    pub mq_q: f64,
    pub mq_outer_p: f64,
    pub mq_lp: f64,
}

// ---------------------------------------------------------------------------
// quadrature helpers on [0, ∞)
// ---------------------------------------------------------------------------

const PANEL: usize = 24;

/// `∫_a^b f dr` with composite Gauss-Legendre panels of width ≤ `width`.
fn integrate_panels(f: &dyn Fn(f64) -> f64, a: f64, b: f64, width: f64) -> f64 {
    let mut acc = 0.0;
    let mut left = a;
    while left < b - 1e-300 {
        let right = (left + width).min(b);
        let (xs, ws) = gauss_legendre_on(PANEL, left, right);
        acc += xs.iter().zip(&ws).map(|(&x, &w)| f(x) * w).sum::<f64>();
        left = right;
    }
    acc
}

/// `∫_0^∞ f dr`: a resolved core plus dyadic tail blocks with geometric
/// extrapolation. Errors when the block integrals fail to decay.
fn integrate_halfline(f: &dyn Fn(f64) -> f64, core: f64, what: &str) -> Result<f64> {
    let width = (core / 16.0).min(0.5);
    let mut total = integrate_panels(f, 0.0, core, width);
    let mut left = core;
    let mut prev_block = f64::INFINITY;
    for _ in 0..60 {
        let block = integrate_panels(f, left, 2.0 * left, (left / 8.0).min(4.0));
        total += block;
        if block.abs() <= 1e-14 * total.abs().max(1e-300) {
            return Ok(total);
        }
        if block.abs() >= prev_block.abs() && block.abs() > 1e-12 * total.abs() {
            return Err(ScatterError::DivergentIntegral(format!(
                "{what}: dyadic blocks not decaying at r ≈ {left:.1}"
            )));
        }
        prev_block = block;
        left *= 2.0;
    }
    Err(ScatterError::DivergentIntegral(format!(
        "{what}: tail not exhausted after 60 dyadic blocks"
    )))
}

fn effective_radius(v: &Potential) -> f64 {
    match &v.kind {
        PotentialKind::Gaussian { scale, .. } => 8.0 * scale,
        PotentialKind::Yukawa { scale, .. } => 40.0 * scale,
        PotentialKind::AubinTalentiLinearization { lambda } => 20.0 / lambda,
        PotentialKind::Table { rs, .. } => rs.last().copied().unwrap_or(1.0),
    }
}

// ---------------------------------------------------------------------------
// Kato norm
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, Serialize)]
pub struct KatoNorm {
    pub value: f64,
    /// Center radius where the sup over the center grid is attained.
    pub argmax: f64,
}

/// `‖V‖_𝒦 = sup_x ∫ |V(y)|/|x-y| dy` for radial `V`.
///
/// The angular integral reduces to `∫ dω/|x - sω| = 4π/max(|x|, s)`, so the
/// sup over `ℝ³` is a one-parameter scan over the center radius.
pub fn kato_norm(v: &Potential) -> Result<KatoNorm> {
    assert_eq!(v.dimension, Dimension::Radial3);
    if v.sup_abs() == 0.0 {
        return Ok(KatoNorm {
            value: 0.0,
            argmax: 0.0,
        });
    }
    let core = effective_radius(v);
    let at = |t: f64| -> Result<f64> {
        let f = move |s: f64| v.eval(s).abs() * s * s / t.max(s);
        integrate_halfline(&f, core.max(2.0 * t), "kato norm")
    };
    let mut best = (4.0 * std::f64::consts::PI * at(0.0)?, 0.0);
    let n_centers = 192;
    for i in 0..n_centers {
        let t = core * (i as f64 + 1.0) / n_centers as f64;
        let val = 4.0 * std::f64::consts::PI * at(t)?;
        if val > best.0 {
            best = (val, t);
        }
    }
    Ok(KatoNorm {
        value: best.0,
        argmax: best.1,
    })
}

// ---------------------------------------------------------------------------
// dyadic B^β norm
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BBetaNorm {
    pub value: f64,
    /// Geometric estimate for the shells beyond the working radius.
    pub truncation_tail: f64,
}

/// `‖V‖_{B^β} = ‖1_{[|x|≤1]}V‖₂ + Σ_{j≥0} 2^{jβ} ‖1_{[2^j ≤ |x| ≤ 2^{j+1}]}V‖₂`
/// with 3D `L²` norms, shells truncated at `r_max`.
///
/// Errors when the extrapolated tail exceeds 1% of the partial sum.
pub fn b_beta_norm(v: &Potential, beta: f64, r_max: f64) -> Result<BBetaNorm> {
    assert!(beta >= 0.0);
    assert_eq!(v.dimension, Dimension::Radial3);
    if v.sup_abs() == 0.0 {
        return Ok(BBetaNorm {
            value: 0.0,
            truncation_tail: 0.0,
        });
    }
    let l2_piece = |a: f64, b: f64| -> f64 {
        let f = |s: f64| 4.0 * std::f64::consts::PI * v.eval(s).powi(2) * s * s;
        integrate_panels(&f, a, b, ((b - a) / 24.0).min(0.25))
            .max(0.0)
            .sqrt()
    };
    let mut value = l2_piece(0.0, 1.0);
    let mut terms: Vec<f64> = Vec::new();
    let mut j = 0u32;
    loop {
        let lo = 2f64.powi(j as i32);
        let hi = 2.0 * lo;
        if hi > r_max {
            break;
        }
        let term = 2f64.powf(j as f64 * beta) * l2_piece(lo, hi);
        value += term;
        terms.push(term);
        j += 1;
    }
    if terms.is_empty() {
        return Err(ScatterError::GridTooSmall(format!(
            "B^β needs r_max ≥ 2, got {r_max}"
        )));
    }
    let last = *terms.last().unwrap();
    let truncation_tail = if terms.len() >= 2 && terms[terms.len() - 2] > 0.0 {
        let q = last / terms[terms.len() - 2];
        if q < 0.9 {
            last * q / (1.0 - q)
        } else {
            f64::INFINITY
        }
    } else if last == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    if !(truncation_tail <= 0.01 * value) {
        return Err(ScatterError::TruncationTail {
            tail: truncation_tail,
            limit: 0.01 * value,
        });
    }
    Ok(BBetaNorm {
        value,
        truncation_tail,
    })
}

// ---------------------------------------------------------------------------
// Y norm and M_q maximal function
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, Serialize)]
pub struct YStarNorms {
    pub y_norm: f64,
    pub mq_lp: f64,
}

/// `‖V‖_Y = Σ_j 2^j ‖V‖_{L^∞(D_j)}` over covering dyadic shells
/// (`D_0` the unit ball, `D_j = {2^{j-1} ≤ |x| ≤ 2^j}`), together with the
/// outer `L^p` norm of `M_q(V)(x) = [∫_{|y|≤1/2} |V(x+y)|^q dy]^{1/q}`.
pub fn y_star_norms(v: &Potential, q: f64, outer_p: f64, r_max: f64) -> Result<YStarNorms> {
    assert!(q >= 1.0, "M_q needs q ≥ 1");
    assert!(outer_p >= 1.0);
    assert_eq!(v.dimension, Dimension::Radial3);
    if v.sup_abs() == 0.0 {
        return Ok(YStarNorms {
            y_norm: 0.0,
            mq_lp: 0.0,
        });
    }

    // Y norm: shell sups scanned on a fine subgrid per shell.
    let shell_sup = |a: f64, b: f64| -> f64 {
        let n = 512;
        (0..=n)
            .map(|i| v.eval(a + (b - a) * i as f64 / n as f64).abs())
            .fold(0.0, f64::max)
    };
    let mut y_norm = shell_sup(0.0, 1.0);
    let mut terms = Vec::new();
    let mut j = 1u32;
    loop {
        let hi = 2f64.powi(j as i32);
        let lo = 0.5 * hi;
        if hi > r_max {
            break;
        }
        let term = 2f64.powf(j as f64) * shell_sup(lo, hi);
        y_norm += term;
        terms.push(term);
        j += 1;
    }
    if terms.len() >= 2 {
        let last = terms[terms.len() - 1];
        let prev = terms[terms.len() - 2];
        let tail = if prev > 0.0 && last / prev < 0.9 {
            let r = last / prev;
            last * r / (1.0 - r)
        } else if last == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        if !(tail <= 0.01 * y_norm) {
            return Err(ScatterError::DivergentIntegral(format!(
                "Y norm tail does not converge (last shells {prev:.3e} → {last:.3e})"
            )));
        }
    }

    // M_q on radial centers, then the outer L^p norm.
    let (rho_x, rho_w) = gauss_legendre_on(24, 0.0, 0.5);
    let (mu_x, mu_w) = gauss_legendre_on(32, -1.0, 1.0);
    let m_q = |t: f64| -> f64 {
        let mut acc = 0.0;
        for (&rho, &wr) in rho_x.iter().zip(&rho_w) {
            for (&mu, &wm) in mu_x.iter().zip(&mu_w) {
                let dist = (t * t + rho * rho + 2.0 * t * rho * mu).max(0.0).sqrt();
                acc += v.eval(dist).abs().powf(q) * rho * rho * wr * wm;
            }
        }
        (2.0 * std::f64::consts::PI * acc).powf(1.0 / q)
    };
    let centers = 384usize;
    let reach = effective_radius(v) + 1.0;
    let dt = reach / centers as f64;
    let mut lp_acc = 0.0;
    for i in 0..centers {
        let t = (i as f64 + 0.5) * dt;
        lp_acc += m_q(t).powf(outer_p) * t * t * dt;
    }
    let mq_lp = (4.0 * std::f64::consts::PI * lp_acc).powf(1.0 / outer_p);

    Ok(YStarNorms { y_norm, mq_lp })
}

/// Plain 3D radial `L^p` norm from the closed form.
pub fn lp_norm(v: &Potential, p: f64) -> Result<f64> {
    if v.sup_abs() == 0.0 {
        return Ok(0.0);
    }
    let f = move |s: f64| 4.0 * std::f64::consts::PI * v.eval(s).abs().powf(p) * s * s;
    Ok(integrate_halfline(&f, effective_radius(v), "L^p norm")?.powf(1.0 / p))
}

/// Full report with all norms at the requested parameters.
pub fn norm_report(
    v: &Potential,
    p: f64,
    beta: f64,
    q: f64,
    outer_p: f64,
    r_max: f64,
) -> Result<NormReport> {
    let ys = y_star_norms(v, q, outer_p, r_max)?;
    Ok(NormReport {
        l2: lp_norm(v, 2.0)?,
        p,
        l_p: lp_norm(v, p)?,
        kato: kato_norm(v)?.value,
        beta,
        b_beta: b_beta_norm(v, beta, r_max)?.value,
        y_norm: ys.y_norm,
        mq_q: q,
        mq_outer_p: outer_p,
        mq_lp: ys.mq_lp,
    })
}

// ---------------------------------------------------------------------------
// Aubin-Talenti pair
// ---------------------------------------------------------------------------

/// The linearization potential `V = -5W_λ⁴` together with its zero-energy
/// resonance `ψ_λ = ∂_μ|_{μ=λ} W_μ`, sampled on `grid`.
#[derive(Debug, Clone)]
pub struct AubinTalentiPair {
    pub potential: Potential,
    pub resonance: Vec<f64>,
}

pub fn aubin_talenti(lambda: f64, grid: &RadialGrid) -> AubinTalentiPair {
    assert!(lambda > 0.0);
    let potential = Potential {
        kind: PotentialKind::AubinTalentiLinearization { lambda },
        dimension: Dimension::Radial3,
    };
    let resonance = grid
        .nodes()
        .iter()
        .map(|&r| aubin_talenti_resonance(lambda, r))
        .collect();
    AubinTalentiPair {
        potential,
        resonance,
    }
}

/// `ψ_λ(r) = ∂_μ|_{μ=λ} [μ^{1/2} W(μr)]`.
pub fn aubin_talenti_resonance(lambda: f64, r: f64) -> f64 {
    0.5 * lambda.powf(-0.5) * aubin_talenti_w(lambda * r)
        + lambda.powf(0.5) * r * aubin_talenti_w_prime(lambda * r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    const PI: f64 = std::f64::consts::PI;

    #[test]
    fn builtin_profiles_match_closed_forms() {
        let g = RadialGrid::new(20.0, 64);
        let v = Potential::gaussian(0.7, 1.3);
        for (&r, &s) in g.nodes().iter().zip(v.sample(&g).iter()) {
            assert!((s - 0.7 * (-(r / 1.3) * (r / 1.3)).exp()).abs() < 1e-12);
        }
        let at = aubin_talenti(1.0, &g);
        for (&r, &s) in g.nodes().iter().zip(at.potential.sample(&g).iter()) {
            assert!((s + 5.0 * (1.0 + r * r / 3.0).powi(-2)).abs() < 1e-12);
        }
    }

    #[test]
    fn kato_norm_examples() {
        assert_eq!(kato_norm(&Potential::zero()).unwrap().value, 0.0);
        let k = kato_norm(&Potential::gaussian(1.0, 1.0)).unwrap();
        assert!((k.value - 2.0 * PI).abs() < 1e-8, "got {}", k.value);
        assert_eq!(k.argmax, 0.0);
        // Half the amplitude sits below the 4π smallness threshold.
        let k2 = kato_norm(&Potential::gaussian(0.5, 1.0)).unwrap();
        assert!((k2.value - PI).abs() < 1e-8);
        assert!(k2.value < 4.0 * PI);
    }

    #[test]
    fn b_beta_examples() {
        assert_eq!(
            b_beta_norm(&Potential::zero(), 0.5, 64.0).unwrap().value,
            0.0
        );
        // Unit-ball indicator: only the ball term contributes, value √(4π/3).
        // The jump is tabulated with a 1e-9 transition so the interpolation
        // sliver beyond r = 1 is negligible.
        let mut rs: Vec<f64> = (0..=1000).map(|i| i as f64 * 0.001).collect();
        rs.push(1.0 + 1e-9);
        rs.extend((1..=3000).map(|i| 1.0 + 2e-9 + i as f64 * 0.001));
        let vs: Vec<f64> = rs
            .iter()
            .map(|&r| if r <= 1.0 { 1.0 } else { 0.0 })
            .collect();
        let ball = Potential::from_table(rs, vs);
        let b = b_beta_norm(&ball, 0.5, 64.0).unwrap();
        let exact = (4.0 * PI / 3.0).sqrt();
        // The indicator edge is resolved to quadrature-panel accuracy.
        assert!((b.value - exact).abs() < 2e-3, "{} vs {exact}", b.value);

        let g = b_beta_norm(&Potential::gaussian(1.0, 1.0), 0.5, 64.0).unwrap();
        assert!(g.value.is_finite() && g.value > 0.0);
        assert!(g.truncation_tail <= 0.01 * g.value);
    }

    #[test]
    fn b_beta_matches_refined_oracle() {
        // 10x-resolution shell quadrature oracle.
        let v = Potential::gaussian(1.0, 1.0);
        let beta = 0.5;
        let oracle = {
            let l2 = |a: f64, b: f64| -> f64 {
                let n = 20000;
                let h = (b - a) / n as f64;
                (0..n)
                    .map(|i| {
                        let r = a + (i as f64 + 0.5) * h;
                        4.0 * PI * v.eval(r).powi(2) * r * r * h
                    })
                    .sum::<f64>()
                    .sqrt()
            };
            let mut total = l2(0.0, 1.0);
            for j in 0..5 {
                let lo = 2f64.powi(j);
                total += 2f64.powf(j as f64 * beta) * l2(lo, 2.0 * lo);
            }
            total
        };
        let b = b_beta_norm(&v, beta, 64.0).unwrap();
        assert!(
            (b.value - oracle).abs() <= 1e-6 * oracle,
            "{} vs {oracle}",
            b.value
        );
    }

    #[test]
    fn y_star_examples() {
        let z = y_star_norms(&Potential::zero(), 1.5, 2.0, 64.0).unwrap();
        assert_eq!((z.y_norm, z.mq_lp), (0.0, 0.0));

        let g = y_star_norms(&Potential::gaussian(1.0, 1.0), 1.5, 2.0, 64.0).unwrap();
        assert!(g.y_norm.is_finite() && g.mq_lp.is_finite());

        // (1+r)^{-3} gives a finite Y norm; (1+r)^{-1} must be rejected.
        let mk = |p: f64| {
            let rs: Vec<f64> = (0..60000).map(|i| i as f64 * 0.01).collect();
            let vs: Vec<f64> = rs.iter().map(|&r| (1.0 + r).powf(-p)).collect();
            Potential::from_table(rs, vs)
        };
        let fine = y_star_norms(&mk(3.0), 1.5, 2.0, 512.0).unwrap();
        assert!(fine.y_norm.is_finite());
        assert!(matches!(
            y_star_norms(&mk(1.0), 1.5, 2.0, 512.0),
            Err(ScatterError::DivergentIntegral(_))
        ));
    }

    #[test]
    fn mq_matches_refined_oracle() {
        // Brute-force midpoint oracle at one center, ~10x resolution.
        let v = Potential::gaussian(1.0, 1.0);
        let q = 1.5;
        let t = 0.8;
        let oracle = {
            let n_rho = 240;
            let n_mu = 320;
            let mut acc = 0.0;
            for i in 0..n_rho {
                let rho = 0.5 * (i as f64 + 0.5) / n_rho as f64;
                for k in 0..n_mu {
                    let mu = -1.0 + 2.0 * (k as f64 + 0.5) / n_mu as f64;
                    let d = (t * t + rho * rho + 2.0 * t * rho * mu).sqrt();
                    acc += v.eval(d).abs().powf(q)
                        * rho
                        * rho
                        * (0.5 / n_rho as f64)
                        * (2.0 / n_mu as f64);
                }
            }
            (2.0 * PI * acc).powf(1.0 / q)
        };
        let (rho_x, rho_w) = gauss_legendre_on(24, 0.0, 0.5);
        let (mu_x, mu_w) = gauss_legendre_on(32, -1.0, 1.0);
        let mut acc = 0.0;
        for (&rho, &wr) in rho_x.iter().zip(&rho_w) {
            for (&mu, &wm) in mu_x.iter().zip(&mu_w) {
                let d = (t * t + rho * rho + 2.0 * t * rho * mu).sqrt();
                acc += v.eval(d).abs().powf(q) * rho * rho * wr * wm;
            }
        }
        let ours = (2.0 * PI * acc).powf(1.0 / q);
        assert!((ours - oracle).abs() < 1e-4 * oracle, "{ours} vs {oracle}");
    }

    #[test]
    fn aubin_talenti_values_and_resonance() {
        assert!((aubin_talenti_w(0.0) - 1.0).abs() < 1e-15);
        let r3 = 3f64.sqrt();
        assert!((aubin_talenti_w(r3) - 1.0 / 2f64.sqrt()).abs() < 1e-15);
        // ψ(0) = 1/2 from differentiating the closed form.
        assert!((aubin_talenti_resonance(1.0, 0.0) - 0.5).abs() < 1e-15);
        // ψ ~ c/r at infinity: r·ψ stabilizes, r²·ψ does not.
        let p1 = 200.0 * aubin_talenti_resonance(1.0, 200.0);
        let p2 = 400.0 * aubin_talenti_resonance(1.0, 400.0);
        assert!((p1 - p2).abs() < 0.01 * p1.abs(), "rψ: {p1} vs {p2}");
        let q1 = 200.0 * p1;
        let q2 = 400.0 * p2;
        assert!((q2 - q1).abs() > 0.5 * q1.abs(), "r²ψ should keep growing");
    }

    #[test]
    fn norms_absolutely_homogeneous_and_monotone() {
        let v1 = Potential::gaussian(0.6, 1.0);
        let v2 = Potential::gaussian(1.3, 1.0); // pointwise dominates v1
        let c = -2.5;
        let k1 = kato_norm(&v1).unwrap().value;
        let kc = kato_norm(&v1.scaled(c)).unwrap().value;
        assert!((kc - c.abs() * k1).abs() < 1e-10 * kc.max(1.0));
        let b1 = b_beta_norm(&v1, 0.5, 64.0).unwrap().value;
        let bc = b_beta_norm(&v1.scaled(c), 0.5, 64.0).unwrap().value;
        assert!((bc - c.abs() * b1).abs() < 1e-9 * bc.max(1.0));

        let k2 = kato_norm(&v2).unwrap().value;
        assert!(k1 <= k2);
        let b2 = b_beta_norm(&v2, 0.5, 64.0).unwrap().value;
        assert!(b1 <= b2);
        let y1 = y_star_norms(&v1, 1.5, 2.0, 64.0).unwrap();
        let y2 = y_star_norms(&v2, 1.5, 2.0, 64.0).unwrap();
        assert!(y1.y_norm <= y2.y_norm && y1.mq_lp <= y2.mq_lp);
    }

    #[test]
    fn csv_round_trip_and_header_requirement() {
        let dir = std::env::temp_dir();
        let good = dir.join("scatterlab_pot_good.csv");
        let mut fh = std::fs::File::create(&good).unwrap();
        writeln!(fh, "r,v").unwrap();
        for i in 0..50 {
            let r = i as f64 * 0.1;
            writeln!(fh, "{},{}", r, (-r).exp()).unwrap();
        }
        drop(fh);
        let v = Potential::from_csv(&good).unwrap();
        assert!((v.eval(1.05) - (-1.05f64).exp()).abs() < 1e-3);

        let bad = dir.join("scatterlab_pot_bad.csv");
        std::fs::write(&bad, "0.0,1.0\n0.1,0.9\n").unwrap();
        assert!(matches!(
            Potential::from_csv(&bad),
            Err(ScatterError::CsvParse { line: 1, .. })
        ));
    }
}
