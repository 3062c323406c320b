use proptest::prelude::*;
use sectio::sphere::{
    dot, great_subsphere_grid, orthonormal_complement, sphere_area, subspace_grid,
};
use sectio::{Direction, GridSpec};

fn vector(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, n)
        .prop_filter("nonzero", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-6)
}

fn dim_and_vector() -> impl Strategy<Value = (usize, Vec<f64>)> {
    (3usize..=7).prop_flat_map(|n| (Just(n), vector(n)))
}

#[test]
fn weights_sum_to_the_area() {
    for n in 2..=6 {
        let total: f64 = GridSpec::jacobi(8).build(n).unwrap().weights().iter().sum();
        assert!((total / sphere_area(n) - 1.0).abs() < 1e-13, "n={n}");
        let total: f64 = GridSpec::orthant(16)
            .build(n)
            .unwrap()
            .weights()
            .iter()
            .sum();
        assert!((total / sphere_area(n) - 1.0).abs() < 1e-8, "n={n}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn complement_is_an_orthonormal_frame_of_the_hyperplane((n, v) in dim_and_vector()) {
        let xi = Direction::normalized(v).unwrap();
        let frame = orthonormal_complement(&xi);
        let basis = frame.basis();
        prop_assert_eq!(basis.len(), n - 1);
        for (i, u) in basis.iter().enumerate() {
            prop_assert!(dot(u, xi.coords()).abs() < 1e-14);
            for (j, w) in basis.iter().enumerate() {
                let expected = if i == j { 1.0 } else { 0.0 };
                prop_assert!((dot(u, w) - expected).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn subsphere_nodes_lie_in_the_hyperplane((n, v) in dim_and_vector()) {
        let xi = Direction::normalized(v).unwrap();
        let g = great_subsphere_grid(&orthonormal_complement(&xi), 6).unwrap();
        for x in g.nodes() {
            prop_assert!(dot(x, xi.coords()).abs() < 1e-13);
            prop_assert!((dot(x, x) - 1.0).abs() < 1e-13);
        }
        let total: f64 = g.weights().iter().sum();
        prop_assert!((total / sphere_area(n - 1) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn subsphere_second_moment_is_rotation_invariant(n in 3usize..=5, v in vector(5), w in vector(5)) {
        let v = v[..n].to_vec();
        prop_assume!(dot(&v, &v) > 1e-6);
        let xi = Direction::normalized(v).unwrap();
        prop_assume!(dot(&w[..n], &w[..n]) > 1e-6);
        let u = Direction::normalized(w[..n].to_vec()).unwrap();
        let frame = orthonormal_complement(&xi);
        // ∫_{S ∩ ξ^⊥} (x·u)² = |S^{n-2}| (1 - (u·ξ)²) / (n-1)
        let c = dot(u.coords(), xi.coords());
        let expected = sphere_area(n - 1) * (1.0 - c * c) / (n - 1) as f64;
        for (spec, tol) in [(GridSpec::jacobi(4), 1e-12), (GridSpec::orthant(16), 1e-7)] {
            let g = subspace_grid(&frame, spec).unwrap();
            let got = g.integrate(|x| dot(x, u.coords()).powi(2));
            prop_assert!((got - expected).abs() < tol * sphere_area(n - 1), "{:?}", spec);
        }
    }

    #[test]
    fn normalized_directions_are_unit(v in vector(5)) {
        let d = Direction::normalized(v).unwrap();
        prop_assert!((dot(d.coords(), d.coords()) - 1.0).abs() < 1e-15);
        prop_assert!(Direction::new(d.coords().iter().map(|x| 2.0 * x).collect()).is_err());
    }
}
