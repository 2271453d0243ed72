//! Property tests for the shared numerical infrastructure.

use proptest::prelude::*;
use scatterlab::numerics::{fit_power_law, LineFourier, LineGrid, RadialGrid, SineTransform};
use scatterlab::C64;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Scaling the values of a power law changes the prefactor only.
    #[test]
    fn fit_power_law_scale_equivariant(
        exponent in 0.1f64..3.0,
        prefactor in 0.1f64..50.0,
        scale in 0.01f64..100.0,
    ) {
        let samples: Vec<(f64, f64)> = (0..20)
            .map(|i| {
                let t = 2.0 + i as f64;
                (t, prefactor * t.powf(-exponent))
            })
            .collect();
        let scaled: Vec<(f64, f64)> = samples.iter().map(|&(t, v)| (t, scale * v)).collect();
        let f1 = fit_power_law(&samples, (2.0, 21.0)).unwrap();
        let f2 = fit_power_law(&scaled, (2.0, 21.0)).unwrap();
        prop_assert!((f1.exponent - f2.exponent).abs() < 1e-12);
        prop_assert!((f1.exponent - exponent).abs() < 1e-9);
        prop_assert!((f2.prefactor / f1.prefactor - scale).abs() < 1e-9 * scale);
    }

    /// Sine-transform round trip and Parseval on random data.
    #[test]
    fn sine_transform_round_trip_random(seed in 0u64..1000) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let grid = RadialGrid::new(25.0, 128);
        let st = SineTransform::new(&grid);
        let u: Vec<C64> = (0..128)
            .map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        let back = st.inverse_raw(&st.forward_raw(&u));
        let err: f64 = u.iter().zip(&back).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        prop_assert!(err < 1e-10);
        let (c, _) = st.spectral(&u, grid.spacing(), 1.0);
        let lhs: f64 = u.iter().map(|z| z.norm_sqr()).sum::<f64>() * grid.spacing();
        let rhs: f64 = c.iter().map(|z| z.norm_sqr()).sum();
        prop_assert!((lhs - rhs).abs() < 1e-10 * lhs.max(1e-300));
    }

    /// Line Fourier transform round trip on random data.
    #[test]
    fn line_fourier_round_trip_random(seed in 0u64..1000) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let grid = LineGrid::new(10.0, 135);
        let lf = LineFourier::new(&grid);
        let x: Vec<C64> = (0..135)
            .map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        let back = lf.inverse(&lf.forward(&x));
        let err: f64 = x.iter().zip(&back).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        prop_assert!(err < 1e-10);
    }
}
