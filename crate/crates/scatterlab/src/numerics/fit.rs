//! Least-squares power-law fitting in log-log coordinates, used for every
//! decay-exponent measurement in the crate.

use serde::Serialize;

use crate::error::{Result, ScatterError};

/// Result of fitting `value ≈ prefactor · t^{-exponent}` on a window.
#[derive(Debug, Clone, Serialize)]
pub struct PowerLawFit {
    /// Sign convention: `value ~ t^{-exponent}` (decay has positive exponent).
    pub exponent: f64,
    pub prefactor: f64,
    /// RMS residual of the straight-line fit in log-log coordinates.
    pub residual: f64,
    pub window: (f64, f64),
    pub samples_used: usize,
}

/// Fit `log value` against `log t` over `window = [t_min, t_max]`.
///
/// Requires at least 8 strictly positive samples inside the window.
pub fn fit_power_law(samples: &[(f64, f64)], window: (f64, f64)) -> Result<PowerLawFit> {
    let (t_min, t_max) = window;
    assert!(t_min > 0.0 && t_max > t_min, "window must be positive and ordered");
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &(t, v) in samples {
        if t < t_min || t > t_max {
            continue;
        }
        if v <= 0.0 {
            return Err(ScatterError::NonPositiveSample { t, value: v });
        }
        xs.push(t.ln());
        ys.push(v.ln());
    }
    if xs.len() < 8 {
        return Err(ScatterError::TooFewSamples {
            what: "power-law fit window",
            have: xs.len(),
            need: 8,
        });
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let residual = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let e = y - (slope * x + intercept);
            e * e
        })
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(PowerLawFit {
        exponent: -slope,
        prefactor: intercept.exp(),
        residual,
        window,
        samples_used: xs.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(f: impl Fn(f64) -> f64, t0: f64, t1: f64, n: usize) -> Vec<(f64, f64)> {
        (0..n)
            .map(|i| {
                let t = t0 + (t1 - t0) * i as f64 / (n - 1) as f64;
                (t, f(t))
            })
            .collect()
    }

    #[test]
    fn exact_power_law_recovered() {
        let s = sample(|t| 7.0 * t.powf(-1.5), 1.0, 100.0, 40);
        let fit = fit_power_law(&s, (1.0, 100.0)).unwrap();
        assert!((fit.exponent - 1.5).abs() < 1e-12);
        assert!((fit.prefactor - 7.0).abs() < 1e-10);
        assert!(fit.residual <= 1e-12);
    }

    #[test]
    fn small_perturbation_moves_exponent_little() {
        let s = sample(|t| t.powf(-1.5) * (1.0 + 0.01 * t.sin()), 10.0, 100.0, 64);
        let fit = fit_power_law(&s, (10.0, 100.0)).unwrap();
        assert!((fit.exponent - 1.5).abs() <= 0.01, "exponent {}", fit.exponent);
    }

    #[test]
    fn constant_samples_have_zero_exponent() {
        let s = sample(|_| 3.0, 1.0, 50.0, 20);
        let fit = fit_power_law(&s, (1.0, 50.0)).unwrap();
        assert!(fit.exponent.abs() < 1e-13);
    }

    #[test]
    fn nonpositive_sample_is_identified() {
        let mut s = sample(|t| t.powf(-1.0), 1.0, 50.0, 20);
        s[5].1 = -0.5;
        let t_bad = s[5].0;
        match fit_power_law(&s, (1.0, 50.0)) {
            Err(ScatterError::NonPositiveSample { t, .. }) => {
                assert!((t - t_bad).abs() < 1e-12)
            }
            other => panic!("expected NonPositiveSample, got {other:?}"),
        }
    }

    #[test]
    fn too_few_samples_rejected() {
        let s = sample(|t| t.powf(-1.0), 1.0, 50.0, 20);
        assert!(matches!(
            fit_power_law(&s, (40.0, 50.0)),
            Err(ScatterError::TooFewSamples { .. })
        ));
    }

    #[test]
    fn scale_equivariance() {
        let s = sample(|t| 2.0 * t.powf(-0.75) * (1.0 + 0.05 * (3.0 * t).cos()), 5.0, 80.0, 50);
        let scaled: Vec<(f64, f64)> = s.iter().map(|&(t, v)| (t, 13.0 * v)).collect();
        let f1 = fit_power_law(&s, (5.0, 80.0)).unwrap();
        let f2 = fit_power_law(&scaled, (5.0, 80.0)).unwrap();
        assert!((f1.exponent - f2.exponent).abs() < 1e-12);
        assert!((f2.prefactor / f1.prefactor - 13.0).abs() < 1e-9);
    }
}
