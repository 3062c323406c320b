use std::f64::consts::PI;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sectio::harmonics::{
    expand, fourier_multiplier, harmonic_dim, radon_inverse, radon_multiplier, radon_transform,
    HarmonicExpansion, SourceDegree,
};
use sectio::{Direction, GridSpec};

fn random_expansion(n: usize, m: usize, seed: u64) -> HarmonicExpansion {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let coeffs = (0..=m)
        .step_by(2)
        .map(|d| {
            (0..harmonic_dim(n, d))
                .map(|_| r.random_range(-1.0..1.0))
                .collect()
        })
        .collect();
    HarmonicExpansion::from_coefficients(n, m, coeffs).unwrap()
}

fn max_rel_diff(a: &HarmonicExpansion, b: &HarmonicExpansion, scale: f64) -> f64 {
    a.all_coefficients()
        .iter()
        .flatten()
        .zip(b.all_coefficients().iter().flatten())
        .map(|(x, y)| (x * scale - y).abs() / scale)
        .fold(0.0, f64::max)
}

#[test]
fn multiplier_products_give_the_inversion_constant() {
    for n in 3..=6 {
        for m in (0..=24).step_by(2) {
            let prod = fourier_multiplier(n, 1.0, m).unwrap()
                * fourier_multiplier(n, (n - 1) as f64, m).unwrap();
            assert!(
                (prod / (2.0 * PI).powi(n as i32) - 1.0).abs() < 1e-12,
                "n={n} m={m}"
            );
        }
    }
    assert!(radon_multiplier(4, 3).is_err());
    assert!(fourier_multiplier(4, 2.0, 2).is_err());
}

#[test]
fn radon_acts_diagonally_on_basis_functions() {
    let mut r = ChaCha8Rng::seed_from_u64(11);
    for n in 3..=5 {
        for m in [0, 2, 4] {
            let y = HarmonicExpansion::basis_function(n, 4, m, harmonic_dim(n, m) / 2).unwrap();
            let c = radon_multiplier(n, m).unwrap();
            for _ in 0..4 {
                let xi = Direction::random(n, &mut r);
                let got = radon_transform(|x| y.evaluate(x), &xi, 8).unwrap();
                assert!(
                    (got - c * y.evaluate(xi.coords())).abs() < 1e-8,
                    "n={n} m={m}"
                );
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn expansions_are_even(n in 3usize..=5, seed in any::<u64>(), x in prop::collection::vec(-1.0f64..1.0, 5)) {
        let e = random_expansion(n, 6, seed);
        let p = &x[..n];
        let q: Vec<f64> = p.iter().map(|v| -v).collect();
        prop_assert_eq!(e.evaluate(p), e.evaluate(&q));
    }

    #[test]
    fn grid_round_trip_and_parseval(n in 3usize..=5, seed in any::<u64>()) {
        let e = random_expansion(n, 6, seed);
        let grid = GridSpec::jacobi(14).build(n).unwrap();
        let values = e.evaluate_grid(&grid);
        let back = expand(&values, &grid, 6).unwrap();
        prop_assert!(max_rel_diff(&e, &back, 1.0) < 1e-10);
        let l2 = grid.integrate(|x| e.evaluate(x).powi(2));
        prop_assert!((l2 / e.norm_sq() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn fourier_twice_scales_by_two_pi_to_the_n(n in 3usize..=5, seed in any::<u64>()) {
        let e = random_expansion(n, 8, seed);
        let twice = e
            .fourier(SourceDegree::MinusOne).unwrap()
            .fourier(SourceDegree::MinusNPlusOne).unwrap();
        prop_assert!(max_rel_diff(&e, &twice, (2.0 * PI).powi(n as i32)) < 1e-8);
    }

    #[test]
    fn radon_inverse_round_trip(n in 3usize..=4, seed in any::<u64>()) {
        let g = random_expansion(n, 8, seed);
        let rg = g.radon().unwrap();
        let grid = GridSpec::jacobi(16).build(n).unwrap();
        let inv = radon_inverse(&rg.evaluate_grid(&grid), &grid, 8).unwrap();
        prop_assert!(max_rel_diff(&g, &inv.expansion, 1.0) < 1e-8);
    }
}
