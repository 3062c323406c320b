use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sectio::bodies::{ellipsoid, random_convex_body};
use sectio::measures::{body_measure, section_measure_direct, section_measure_fourier, Density};
use sectio::sphere::ball_volume;
use sectio::{Direction, GridSpec};

fn body(n: usize, seed: u64) -> sectio::bodies::StarBody {
    random_convex_body(n, (1.0, 4.0), &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
}

fn direction(n: usize, seed: u64) -> Direction {
    Direction::random(n, &mut ChaCha8Rng::seed_from_u64(seed ^ 0x5eed))
}

#[test]
fn ellipsoid_volume_is_the_product_of_axes() {
    let axes = [1.5, 0.7, 1.1, 0.9];
    let grid = GridSpec::jacobi(48).build(4).unwrap();
    let v = body_measure(&ellipsoid(&axes).unwrap(), &Density::lebesgue(), &grid).unwrap();
    let expected = axes.iter().product::<f64>() * ball_volume(4);
    assert!((v / expected - 1.0).abs() < 1e-9);
}

#[test]
fn smooth_sections_agree_across_routes() {
    let e = ellipsoid(&[1.3, 0.8, 1.1]).unwrap();
    let f = Density::gaussian();
    let grid = GridSpec::orthant(64).build(3).unwrap();
    let mut r = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..5 {
        let xi = Direction::random(3, &mut r);
        let a = section_measure_direct(&e, &f, &xi, GridSpec::orthant(24)).unwrap();
        let b = section_measure_fourier(&e, &f, &xi, &grid, 32).unwrap();
        assert!((a / b - 1.0).abs() < 1e-6, "{a} vs {b}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn homogeneous_densities_scale_measures(n in 3usize..=4, seed in any::<u64>(), r in 0.3f64..3.0, s in 0.0f64..2.0) {
        let k = body(n, seed);
        let grid = GridSpec::orthant(8).build(n).unwrap();
        let f = Density::lp_power(1.0, s).unwrap();
        let a = body_measure(&k, &f, &grid).unwrap();
        let b = body_measure(&k.scaled(r).unwrap(), &f, &grid).unwrap();
        prop_assert!((b / (a * r.powf(n as f64 + s)) - 1.0).abs() < 1e-11);
        let xi = direction(n, seed);
        let spec = GridSpec::orthant(6);
        let a = section_measure_direct(&k, &f, &xi, spec).unwrap();
        let b = section_measure_direct(&k.scaled(r).unwrap(), &f, &xi, spec).unwrap();
        prop_assert!((b / (a * r.powf(n as f64 - 1.0 + s)) - 1.0).abs() < 1e-11);
    }

    #[test]
    fn gaussian_measures_grow_with_the_body(n in 3usize..=4, seed in any::<u64>(), r in 1.01f64..2.0) {
        let k = body(n, seed);
        let grid = GridSpec::jacobi(8).build(n).unwrap();
        let f = Density::gaussian();
        let small = body_measure(&k, &f, &grid).unwrap();
        let large = body_measure(&k.scaled(r).unwrap(), &f, &grid).unwrap();
        prop_assert!(large > small);
        let xi = direction(n, seed);
        let a = section_measure_direct(&k, &f, &xi, GridSpec::jacobi(8)).unwrap();
        let b = section_measure_direct(&k.scaled(r).unwrap(), &f, &xi, GridSpec::jacobi(8)).unwrap();
        prop_assert!(b > a);
        let c = section_measure_direct(&k, &f, &xi.neg(), GridSpec::jacobi(8)).unwrap();
        prop_assert!((a - c).abs() <= 1e-14 * a);
    }
}
