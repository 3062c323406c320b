//! Body measures and central section measures for weighted densities.
//!
//! Section measures are available by direct polar quadrature over the great
//! subsphere `S^{n-1} ∩ ξ^⊥`, and through the Fourier route
//! `μ(K ∩ ξ^⊥) = (1/π) (A_K · r^{-(n-1)})^∧(ξ)` where
//! `A_K(θ) = ∫_0^{ρ_K(θ)} t^{n-2} f(tθ) dt`.

mod density;

use serde::Serialize;

pub(crate) use density::RadialProfile;
pub use density::{Density, DensitySpec, FactorSpec, RayProfile};

use crate::bodies::{from_radial_samples, StarBody};
use crate::error::{invalid, Error, Result};
use crate::harmonics::{fourier_multiplier, radon_inverse, zonal_transform};
use crate::quadrature::RadialRule;
use crate::sphere::{
    orthonormal_complement, subspace_grid, Direction, GridSpec, SphereGrid, SubspaceFrame,
};

/// Worst increment of `t f_n(tθ) / f_{n-1}(tθ)` between consecutive samples.
#[derive(Debug, Clone, Serialize)]
pub struct RatioCheck {
    /// Minimum over grid directions and consecutive `t` of the increment.
    pub worst: f64,
    pub theta: Vec<f64>,
    pub t: f64,
    /// `worst >= -1e-12 × max |ratio|`.
    pub holds: bool,
}

pub fn ratio_monotone_check(
    f_n: &Density,
    f_n1: &Density,
    grid: &SphereGrid,
    t_samples: &[f64],
) -> Result<RatioCheck> {
    if t_samples.len() < 2 {
        return Err(invalid("ratio check needs at least two t samples"));
    }
    let per_node: Vec<Result<(f64, f64, f64)>> = grid
        .nodes()
        .collect::<Vec<_>>()
        .into_iter()
        .map(|theta| {
            let mut ratios = Vec::with_capacity(t_samples.len());
            for &t in t_samples {
                let x: Vec<f64> = theta.iter().map(|v| v * t).collect();
                let den = f_n1.eval(&x);
                if !(den > 0.0) {
                    return Err(Error::ZeroDensity {
                        theta: theta.to_vec(),
                        t,
                    });
                }
                ratios.push(t * f_n.eval(&x) / den);
            }
            let scale = ratios.iter().fold(0.0f64, |a, r| a.max(r.abs()));
            let (mut worst, mut at) = (f64::INFINITY, t_samples[0]);
            for i in 1..ratios.len() {
                let d = ratios[i] - ratios[i - 1];
                if d < worst {
                    worst = d;
                    at = t_samples[i - 1];
                }
            }
            Ok((worst, at, scale))
        })
        .collect();
    let mut best = RatioCheck {
        worst: f64::INFINITY,
        theta: Vec::new(),
        t: 0.0,
        holds: true,
    };
    let mut scale = 0.0f64;
    for (i, r) in per_node.into_iter().enumerate() {
        let (w, t, s) = r?;
        scale = scale.max(s);
        if w < best.worst {
            best.worst = w;
            best.t = t;
            best.theta = grid.node(i).to_vec();
        }
    }
    best.holds = best.worst >= -1e-12 * scale;
    Ok(best)
}

/// `μ(K) = ∫_{S^{n-1}} ∫_0^{ρ(θ)} t^{n-1} f(tθ) dt dθ`.
pub fn body_measure(body: &StarBody, f: &Density, grid: &SphereGrid) -> Result<f64> {
    body_measure_with(body, f, grid, &RadialRule::default())
}

pub fn body_measure_with(
    body: &StarBody,
    f: &Density,
    grid: &SphereGrid,
    rule: &RadialRule,
) -> Result<f64> {
    check_full_grid(body, grid)?;
    let k = (body.dim() - 1) as f64;
    Ok(grid.weighted_sum(&radial_values(body, f, grid, k, rule)?))
}

/// Values of `A_K(θ) = ∫_0^{ρ_K(θ)} t^{n-2} f(tθ) dt` at grid nodes.
#[derive(Debug, Clone)]
pub struct RadialSectionTransform {
    pub values: Vec<f64>,
}

pub fn section_transform(
    body: &StarBody,
    f: &Density,
    grid: &SphereGrid,
) -> Result<RadialSectionTransform> {
    check_full_grid(body, grid)?;
    let k = (body.dim() - 2) as f64;
    let rule = RadialRule::default();
    Ok(RadialSectionTransform {
        values: radial_values(body, f, grid, k, &rule)?,
    })
}

// `∫_0^{ρ_K(θ)} t^k f(tθ) dt` at every node.
fn radial_values(
    body: &StarBody,
    f: &Density,
    grid: &SphereGrid,
    k: f64,
    rule: &RadialRule,
) -> Result<Vec<f64>> {
    let rhos = grid.map(|x| body.radial(x));
    f.radial_integrals(grid, k, &rhos, rule)
}

fn check_full_grid(body: &StarBody, grid: &SphereGrid) -> Result<()> {
    if grid.dim() != body.dim() || grid.sphere_dim() != body.dim() {
        return Err(Error::DimensionMismatch {
            expected: body.dim(),
            got: grid.sphere_dim(),
        });
    }
    Ok(())
}

/// `∫_{K ∩ H} f` by polar coordinates inside `H`.
pub fn subspace_section_integral(
    body: &StarBody,
    f: &Density,
    frame: &SubspaceFrame,
    spec: GridSpec,
) -> Result<f64> {
    if frame.ambient() != body.dim() {
        return Err(Error::DimensionMismatch {
            expected: body.dim(),
            got: frame.ambient(),
        });
    }
    let grid = subspace_grid(frame, spec)?;
    let k = (frame.dim() - 1) as f64;
    Ok(grid.weighted_sum(&radial_values(body, f, &grid, k, &RadialRule::default())?))
}

/// `μ_{n-1}(K ∩ ξ^⊥)` by quadrature on the great subsphere.
pub fn section_measure_direct(
    body: &StarBody,
    f: &Density,
    xi: &Direction,
    spec: GridSpec,
) -> Result<f64> {
    subspace_section_integral(body, f, &orthonormal_complement(xi), spec)
}

/// `μ_{n-1}(K ∩ ξ^⊥)` through the Fourier transform of `A_K r^{-(n-1)}`.
pub fn section_measure_fourier(
    body: &StarBody,
    f: &Density,
    xi: &Direction,
    grid: &SphereGrid,
    max_degree: usize,
) -> Result<f64> {
    Ok(section_profile_fourier(body, f, std::slice::from_ref(xi), grid, max_degree)?[0])
}

/// Fourier-route section measures for many directions sharing one `A_K` evaluation.
pub fn section_profile_fourier(
    body: &StarBody,
    f: &Density,
    directions: &[Direction],
    grid: &SphereGrid,
    max_degree: usize,
) -> Result<Vec<f64>> {
    let n = body.dim();
    let a = section_transform(body, f, grid)?;
    let odd = grid.odd_fraction(&a.values);
    if odd > crate::harmonics::ODD_REJECT {
        return Err(Error::NotEven(odd));
    }
    zonal_transform(&a.values, grid, directions, max_degree, |m| {
        Ok(fourier_multiplier(n, n as f64 - 1.0, m)? / std::f64::consts::PI)
    })
}

/// Sampled section function `ξ ↦ μ_{n-1}(K ∩ ξ^⊥)`.
///
/// Values are stored at unit directions; the value at `tξ` is read as
/// `value(ξ) / |t|`.
#[derive(Debug, Clone, PartialEq)]
pub struct SectionProfile {
    pub body: String,
    pub density: String,
    pub directions: Vec<Direction>,
    pub values: Vec<f64>,
}

impl SectionProfile {
    pub fn dim(&self) -> usize {
        self.directions.first().map_or(0, Direction::dim)
    }

    /// Degree -1 homogeneous extension at `t · directions[i]`.
    pub fn extended(&self, i: usize, t: f64) -> f64 {
        self.values[i] / t.abs()
    }
}

/// Direct-route section profile over the given directions.
pub fn section_profile(
    body: &StarBody,
    f: &Density,
    directions: &[Direction],
    spec: GridSpec,
) -> Result<SectionProfile> {
    use rayon::prelude::*;
    let values = directions
        .par_iter()
        .map(|xi| section_measure_direct(body, f, xi, spec))
        .collect::<Result<Vec<_>>>()?;
    Ok(SectionProfile {
        body: body.label().to_string(),
        density: f.label().to_string(),
        directions: directions.to_vec(),
        values,
    })
}

/// Nodes of `grid` as directions, for profiles that will be reconstructed.
pub fn grid_directions(grid: &SphereGrid) -> Vec<Direction> {
    grid.nodes()
        .map(|x| Direction::new(x.to_vec()).expect("grid nodes are unit vectors"))
        .collect()
}

/// A body recovered from its section profile.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub body: StarBody,
    /// Recovered `ρ` at the grid nodes.
    pub radial: Vec<f64>,
    /// Recovered `A_K` at the grid nodes.
    pub section_transform: Vec<f64>,
    /// Max residual of the truncated profile expansion at the nodes.
    pub residual: f64,
}

/// Inverts the section map: Radon inversion gives `A_K`, then a monotone
/// radial solve gives `ρ_K` at every node.
pub fn reconstruct_from_sections(
    profile: &SectionProfile,
    f: &Density,
    grid: &SphereGrid,
    max_degree: usize,
) -> Result<Reconstruction> {
    let n = grid.dim();
    if profile.directions.len() != grid.len() {
        return Err(Error::DimensionMismatch {
            expected: grid.len(),
            got: profile.directions.len(),
        });
    }
    for (i, (d, x)) in profile.directions.iter().zip(grid.nodes()).enumerate() {
        if d.coords().iter().zip(x).any(|(a, b)| (a - b).abs() > 1e-9) {
            return Err(invalid(format!(
                "profile direction {i} is not at grid node {i}"
            )));
        }
    }
    if !f.is_strictly_positive() {
        return Err(invalid("reconstruction needs a strictly positive density"));
    }
    let inverse = radon_inverse(&profile.values, grid, max_degree)?;
    let a = inverse.expansion.evaluate_grid(grid);
    if let Some((i, v)) = a.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(Error::NotASectionProfile { node: i, value: *v });
    }
    let rule = RadialRule::default();
    let k = (n - 2) as f64;
    let radial = (0..grid.len())
        .map(|i| f.solve_radius(grid.node(i), k, a[i], &rule))
        .collect::<Result<Vec<_>>>()?;
    let body = from_radial_samples(&radial, grid, max_degree)?;
    Ok(Reconstruction {
        body,
        radial,
        section_transform: a,
        residual: inverse.residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bodies::{ellipsoid, lp_ball};
    use crate::sphere::{ball_volume, build_sphere_grid};
    use std::f64::consts::PI;

    #[test]
    fn ball_volume_in_three_dimensions() {
        let g = build_sphere_grid(3, 8).unwrap();
        let v = body_measure(&lp_ball(3, 2.0).unwrap(), &Density::lebesgue(), &g).unwrap();
        assert!((v - 4.0 * PI / 3.0).abs() < 1e-8);
    }

    #[test]
    fn gaussian_ray_integral_against_incomplete_gamma() {
        use statrs::function::gamma::{gamma, gamma_lr};
        let f = Density::gaussian();
        let rule = RadialRule::default();
        for (k, rho) in [(1.0, 1.0), (2.0, 2.5), (3.0, 0.4), (1.5, 3.0)] {
            let v = f.radial_integral(&[1.0, 0.0, 0.0], k, rho, &rule).unwrap();
            let q: f64 = k + 1.0;
            let exact =
                2f64.powf(q / 2.0 - 1.0) * gamma(q / 2.0) * gamma_lr(q / 2.0, rho * rho / 2.0);
            assert!(
                (v / exact - 1.0).abs() < 1e-10,
                "k={k} rho={rho}: {v} {exact}"
            );
        }
    }

    #[test]
    fn radius_solve_inverts_radial_integral() {
        let rule = RadialRule::default();
        let theta = [0.6, 0.8, 0.0];
        for f in [
            Density::lebesgue(),
            Density::gaussian(),
            Density::lp_power(1.0, 0.5).unwrap(),
            Density::product(&[Density::gaussian(), Density::lp_power(1.0, 1.0).unwrap()]),
        ] {
            let a = f.radial_integral(&theta, 2.0, 1.3, &rule).unwrap();
            let r = f.solve_radius(&theta, 2.0, a, &rule).unwrap();
            assert!((r - 1.3).abs() < 1e-10, "{}: {r}", f.label());
        }
        assert!(Density::gaussian()
            .solve_radius(&theta, 1.0, 10.0, &rule)
            .is_err());
    }

    #[test]
    fn ball_section_transform() {
        let g = build_sphere_grid(4, 6).unwrap();
        let a = section_transform(&lp_ball(4, 2.0).unwrap(), &Density::lebesgue(), &g).unwrap();
        assert!(a.values.iter().all(|v| (v - 1.0 / 3.0).abs() < 1e-14));
        let g3 = build_sphere_grid(3, 6).unwrap();
        let a = section_transform(&lp_ball(3, 2.0).unwrap(), &Density::gaussian(), &g3).unwrap();
        let exact = 1.0 - (-0.5f64).exp();
        assert!(a.values.iter().all(|v| (v - exact).abs() < 1e-10));
    }

    #[test]
    fn direct_sections_of_balls() {
        let xi = Direction::normalized(vec![0.2, 0.4, -0.1, 0.5]).unwrap();
        let v = section_measure_direct(
            &lp_ball(4, 2.0).unwrap(),
            &Density::lebesgue(),
            &xi,
            GridSpec::jacobi(8),
        )
        .unwrap();
        assert!((v - 4.0 * PI / 3.0).abs() < 1e-8);
        let b = lp_ball(3, 2.0).unwrap().scaled(5.0).unwrap();
        let xi = Direction::axis(3, 2);
        let v = section_measure_direct(&b, &Density::gaussian(), &xi, GridSpec::jacobi(8)).unwrap();
        assert!((v - 2.0 * PI * (1.0 - (-12.5f64).exp())).abs() < 1e-8);
    }

    #[test]
    fn subspace_integrals() {
        let b = lp_ball(5, 2.0).unwrap();
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(9);
        let h = crate::sphere::random_frame(5, 3, &mut rng).unwrap();
        let v =
            subspace_section_integral(&b, &Density::lebesgue(), &h, GridSpec::jacobi(8)).unwrap();
        assert!((v - ball_volume(3)).abs() < 1e-8);
        let f = Density::lp_power(2.0, 2.0).unwrap();
        let v = subspace_section_integral(&b, &f, &h, GridSpec::jacobi(8)).unwrap();
        assert!((v - 4.0 * PI / 5.0).abs() < 1e-8);
    }

    #[test]
    fn fourier_route_for_the_ball() {
        let g = build_sphere_grid(5, 12).unwrap();
        let xi = Direction::normalized(vec![1.0, 2.0, 0.0, -1.0, 0.5]).unwrap();
        let v =
            section_measure_fourier(&lp_ball(5, 2.0).unwrap(), &Density::lebesgue(), &xi, &g, 6)
                .unwrap();
        assert!((v / ball_volume(4) - 1.0).abs() < 1e-4);
    }

    #[test]
    fn ratio_checks() {
        let g = build_sphere_grid(3, 4).unwrap();
        let ts: Vec<f64> = (1..=20).map(|i| 0.2 * i as f64).collect();
        let same =
            ratio_monotone_check(&Density::gaussian(), &Density::gaussian(), &g, &ts).unwrap();
        assert!(same.holds && same.worst > 0.0);
        let l1 = Density::lp_power(1.0, 1.0).unwrap();
        let flat = ratio_monotone_check(&Density::lebesgue(), &l1, &g, &ts).unwrap();
        assert!(flat.holds && flat.worst.abs() < 1e-14);
        let mixed =
            ratio_monotone_check(&Density::gaussian(), &Density::lebesgue(), &g, &ts).unwrap();
        assert!(!mixed.holds && mixed.t >= 1.0);
        let zero = ratio_monotone_check(&Density::lebesgue(), &l1, &g, &[0.0, 1.0]);
        assert!(matches!(zero, Err(Error::ZeroDensity { .. })));
    }

    #[test]
    fn ellipsoid_volume() {
        let g = build_sphere_grid(3, 64).unwrap();
        let v = body_measure(
            &ellipsoid(&[2.0, 1.0, 0.5]).unwrap(),
            &Density::lebesgue(),
            &g,
        )
        .unwrap();
        assert!((v / ball_volume(3) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn density_spec_parsing() {
        let d: DensitySpec = serde_json::from_str(r#"{"kind":"gaussian"}"#).unwrap();
        assert_eq!(d.build().unwrap().label(), "gaussian");
        let d: DensitySpec =
            serde_json::from_str(r#"[{"kind":"gaussian"},{"kind":"lp_power","p":1,"s":1}]"#)
                .unwrap();
        let f = d.build().unwrap();
        let x = [1.0, -2.0, 0.5];
        assert!((f.eval(&x) - 3.5 * (-0.5f64 * 5.25).exp()).abs() < 1e-15);
        let bad: DensitySpec = serde_json::from_str(r#"{"kind":"lp_power","p":1,"s":-2}"#).unwrap();
        assert!(bad.build().is_err());
    }
}
