//! Counterexamples from a kernel whose transform dips below zero.
//!
//! `L` is perturbed in `A`-space: `A_D = A_L - ε g`, where `g` is the exact
//! zonal companion of the bump `h(θ) = (θ·ω)^{2k}`. Every section of `D` is
//! then smaller than the matching section of `L` by `ε (2π)^n h(ξ) / π`.
//! `μ_n(D) - μ_n(L)` behaves like `-ε ∫ k g`, which is positive when the
//! bump sits where the kernel transform is negative.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{default_degree, kernel, kernel_grid, kernel_values, section_margins};
use crate::bodies::{convexity_check, ConvexityReport, RadialFunction, StarBody};
use crate::error::{invalid, Error, Result};
use crate::harmonics::{fourier_multiplier, legendre, EvenZonalKernel};
use crate::measures::{section_transform, Density, RadialProfile};
use crate::quadrature::{gauss_gegenbauer, RadialRule};
use crate::sphere::{dot, sphere_area, Direction, GridSpec, SphereGrid};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CounterexampleConfig {
    /// Expansion degree for the kernel transform; the dimension default when unset.
    pub max_degree: Option<usize>,
    /// Largest bump degree `2k` tried.
    pub bump_max_degree: usize,
    /// Gauss–Jacobi resolution of the full-sphere grid for body measures.
    pub measure_resolution: usize,
    /// Random directions for the hypothesis margin, on top of `ω` and the axes.
    pub margin_directions: usize,
    pub convexity_pairs: usize,
    pub convexity_tol: f64,
    /// Expansion degree for the written radial samples.
    pub reload_max_degree: usize,
    pub max_attempts: usize,
    pub seed: u64,
}

impl Default for CounterexampleConfig {
    fn default() -> Self {
        Self {
            max_degree: None,
            bump_max_degree: 24,
            measure_resolution: 48,
            margin_directions: 512,
            convexity_pairs: 100_000,
            convexity_tol: 1e-9,
            reload_max_degree: 12,
            max_attempts: 30,
            seed: 0,
        }
    }
}

/// Region where the kernel transform is below half its minimum.
#[derive(Debug, Clone, Serialize)]
pub struct OmegaDescriptor {
    pub center: Direction,
    pub min_value: f64,
    pub threshold: f64,
    /// Geodesic distance from `±ω` to the nearest scanned node above the threshold.
    pub radius: f64,
    pub tolerance: f64,
}

/// Zonal bump `h(θ) = (θ·ω)^degree` and its companion `g`, scaled to `max|g| = 1`.
#[derive(Debug, Clone, Serialize)]
pub struct ZonalBump {
    pub degree: usize,
    /// `max_t |G(t)|` before scaling.
    pub sup_norm: f64,
    /// `∫ k g` over the sphere after scaling.
    pub pairing: f64,
    #[serde(skip)]
    g: Arc<EvenZonalKernel>,
    #[serde(skip)]
    omega: Vec<f64>,
}

impl ZonalBump {
    pub fn g(&self, theta: &[f64]) -> f64 {
        self.g.eval(dot(theta, &self.omega)) / self.sup_norm
    }

    pub fn h(&self, theta: &[f64]) -> f64 {
        dot(theta, &self.omega).powi(self.degree as i32)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Attempt {
    pub epsilon: f64,
    pub min_radius: Option<f64>,
    pub convex: Option<bool>,
    pub worst_violation: Option<f64>,
    pub hypothesis_margin: Option<f64>,
    pub conclusion_gap: Option<f64>,
}

/// Radial samples of `D` on a Gauss–Jacobi grid, reloadable with `from_radial_samples`.
#[derive(Debug, Clone, Serialize)]
pub struct RadialSamples {
    pub grid: GridSpec,
    pub max_degree: usize,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CounterexampleResult {
    pub success: bool,
    pub epsilon: f64,
    /// `min_ξ [μ_{n-1}(L ∩ ξ^⊥) - μ_{n-1}(D ∩ ξ^⊥)]`.
    pub hypothesis_margin: f64,
    pub margin_direction: Direction,
    pub margin_direction_count: usize,
    /// `μ_n(D) - μ_n(L)`.
    pub conclusion_gap: f64,
    pub measure_l: f64,
    pub measure_d: f64,
    /// First-order value `-ε ∫ k g`.
    pub predicted_gap: f64,
    pub convexity: ConvexityReport,
    pub omega: OmegaDescriptor,
    pub bump: ZonalBump,
    pub attempts: Vec<Attempt>,
    pub curvature_certified: bool,
    pub notes: Vec<String>,
    pub samples: RadialSamples,
    #[serde(skip)]
    pub body: StarBody,
}

#[derive(Debug)]
struct Perturbed {
    l: StarBody,
    f: Density,
    profile: RadialProfile,
    bump: ZonalBump,
    eps: f64,
}

impl RadialFunction for Perturbed {
    fn radial(&self, theta: &[f64]) -> f64 {
        let rho = self.l.radial(theta);
        let c = self.f.ray(theta).c;
        let solve = || -> Result<f64> {
            let target = self.profile.eval(rho)? - self.eps * self.bump.g(theta) / c;
            self.profile.solve(target, rho)
        };
        solve().unwrap_or(f64::NAN)
    }
}

/// Builds `D` with smaller sections than `L` but larger `f_n`-measure.
///
/// Refuses with [`Error::PositiveDefiniteKernel`] when the kernel of `L`
/// passes the positive-definiteness test.
pub fn construct_counterexample(
    l: &StarBody,
    f_n: &Density,
    f_n1: &Density,
    cfg: &CounterexampleConfig,
) -> Result<CounterexampleResult> {
    let n = l.dim();
    if n < 3 {
        return Err(invalid("counterexamples need n >= 3"));
    }
    if cfg.bump_max_degree < 2 || cfg.measure_resolution < cfg.bump_max_degree {
        return Err(invalid("measure resolution must cover the bump degree"));
    }
    let degree = cfg.max_degree.unwrap_or_else(|| default_degree(n));
    let kgrid = kernel_grid(n, degree)?;
    let kern = kernel(l, f_n, f_n1, &kgrid, degree)?;
    let tr = &kern.transform;
    if tr.positive_definite {
        return Err(Error::PositiveDefiniteKernel {
            min_value: tr.min_value,
            tolerance: tr.tolerance,
        });
    }
    let omega = omega_descriptor(&kern.transform, &kgrid);

    let grid = GridSpec::jacobi(cfg.measure_resolution).build(n)?;
    let kvals = kernel_values(l, f_n, f_n1, &grid)?;
    let bump = choose_bump(n, degree, &omega.center, &kvals, &grid, cfg)?;
    let mut notes = Vec::new();
    if bump.pairing >= 0.0 {
        notes.push(format!(
            "no bump of degree <= {} pairs negatively with the kernel",
            cfg.bump_max_degree
        ));
    }

    let a_l = section_transform(l, f_n1, &grid)?.values;
    let eps0 = 0.1 * a_l.iter().fold(f64::INFINITY, |a, v| a.min(*v));
    let measure_l = grid.weighted_sum(&radial_values(l, f_n, &grid)?);
    let directions = margin_directions(n, &omega.center, cfg);
    let section_spec = GridSpec::jacobi(bump.degree.max(8) + 2);
    let (rmin, rmax) = l.radial_range(&grid);
    let profile = f_n1.radial_profile((n - 2) as f64, 0.5 * rmin, 1.5 * rmax)?;

    let mut attempts = Vec::new();
    let mut eps = eps0;
    let mut last = None;
    for _ in 0..cfg.max_attempts.max(1) {
        let d = StarBody::from_radial(
            n,
            format!("D(eps={eps:.3e})"),
            Arc::new(Perturbed {
                l: l.clone(),
                f: f_n1.clone(),
                profile: profile.clone(),
                bump: bump.clone(),
                eps,
            }),
        );
        let mut attempt = Attempt {
            epsilon: eps,
            min_radius: None,
            convex: None,
            worst_violation: None,
            hypothesis_margin: None,
            conclusion_gap: None,
        };
        let convexity = convexity_check(&d, cfg.convexity_pairs, cfg.convexity_tol, cfg.seed);
        attempt.convex = Some(convexity.is_convex);
        attempt.worst_violation = Some(convexity.worst_violation);
        if !convexity.is_convex {
            attempts.push(attempt);
            eps *= 0.5;
            continue;
        }
        let margins = section_margins(&d, l, f_n1, &directions, section_spec)?;
        let (mi, &margin) = margins
            .iter()
            .enumerate()
            .fold((0, &f64::INFINITY), |b, c| if c.1 < b.1 { c } else { b });
        attempt.hypothesis_margin = Some(margin);
        if margin < -1e-9 {
            attempts.push(attempt);
            eps *= 0.5;
            continue;
        }
        let rho = d.radial_samples(&grid);
        let min_radius = rho.iter().fold(f64::INFINITY, |a, v| a.min(*v));
        attempt.min_radius = Some(min_radius);
        if !(min_radius > 0.0) || rho.iter().any(|v| !v.is_finite()) {
            attempts.push(attempt);
            eps *= 0.5;
            continue;
        }
        let a_d = radial_values_at(&d, f_n, &grid, &rho)?;
        let a_ln = radial_values(l, f_n, &grid)?;
        let diff: Vec<f64> = a_d.iter().zip(&a_ln).map(|(x, y)| x - y).collect();
        let gap = grid.weighted_sum(&diff);
        attempt.conclusion_gap = Some(gap);
        attempts.push(attempt);
        last = Some((d, eps, margin, directions[mi].clone(), gap, convexity));
        break;
    }
    let Some((body, epsilon, hypothesis_margin, margin_direction, conclusion_gap, convexity)) =
        last
    else {
        return Err(Error::NonFinite(format!(
            "no admissible epsilon after {} attempts",
            attempts.len()
        )));
    };
    let success = hypothesis_margin >= -1e-9 && conclusion_gap >= 1e-6 * measure_l;
    if !success {
        notes.push("conclusion gap below 1e-6 of the measure of L".into());
    }
    notes.push(
        "convexity is certified by sampled midpoints only; curvature of L is not checked".into(),
    );
    let reload = GridSpec::jacobi(2 * cfg.reload_max_degree);
    let values = body.radial_samples(&reload.build(n)?);
    Ok(CounterexampleResult {
        success,
        epsilon,
        hypothesis_margin,
        margin_direction,
        margin_direction_count: directions.len(),
        conclusion_gap,
        measure_l,
        measure_d: measure_l + conclusion_gap,
        predicted_gap: -epsilon * bump.pairing,
        convexity,
        omega,
        bump,
        attempts,
        curvature_certified: false,
        notes,
        samples: RadialSamples {
            grid: reload,
            max_degree: cfg.reload_max_degree,
            values,
        },
        body,
    })
}

fn radial_values(body: &StarBody, f: &Density, grid: &SphereGrid) -> Result<Vec<f64>> {
    radial_values_at(body, f, grid, &body.radial_samples(grid))
}

fn radial_values_at(
    body: &StarBody,
    f: &Density,
    grid: &SphereGrid,
    rho: &[f64],
) -> Result<Vec<f64>> {
    f.radial_integrals(grid, (body.dim() - 1) as f64, rho, &RadialRule::default())
}

fn omega_descriptor(tr: &crate::harmonics::FourierOnSphere, grid: &SphereGrid) -> OmegaDescriptor {
    let center = tr.argmin.clone();
    let threshold = 0.5 * tr.min_value;
    let values = grid.map(|x| tr.evaluate(x));
    let radius = grid
        .nodes()
        .zip(&values)
        .filter(|(_, v)| **v >= threshold)
        .map(|(x, _)| dot(x, center.coords()).abs().min(1.0).acos())
        .fold(std::f64::consts::FRAC_PI_2, f64::min);
    OmegaDescriptor {
        center,
        min_value: tr.min_value,
        threshold,
        radius,
        tolerance: tr.tolerance,
    }
}

/// Companion `G` of `t^{2k}`: `(G(θ·ω) r^{-(n-1)})^ ∧ = (2π)^n (θ·ω)^{2k}` on the sphere.
fn companion(n: usize, degree: usize) -> Result<EvenZonalKernel> {
    let alpha = (n as f64 - 3.0) / 2.0;
    let rule = gauss_gegenbauer(degree + 4, alpha)?;
    let area = sphere_area(n - 1);
    EvenZonalKernel::new(n, degree, |m| {
        let proj = rule.integrate(-1.0, 1.0, |t| t.powi(degree as i32) * legendre(n, m, t));
        Ok(fourier_multiplier(n, 1.0, m)? * area * proj)
    })
}

fn choose_bump(
    n: usize,
    degree: usize,
    omega: &Direction,
    kvals: &[f64],
    grid: &SphereGrid,
    cfg: &CounterexampleConfig,
) -> Result<ZonalBump> {
    let first = (degree.max(2) + 1) & !1;
    let mut best: Option<ZonalBump> = None;
    for degree in (first..=cfg.bump_max_degree).step_by(2) {
        let g = Arc::new(companion(n, degree)?);
        let sup_norm = (0..=4000)
            .map(|j| g.eval(j as f64 / 4000.0).abs())
            .fold(0.0f64, f64::max);
        let mut bump = ZonalBump {
            degree,
            sup_norm,
            pairing: 0.0,
            g,
            omega: omega.coords().to_vec(),
        };
        let gv = grid.map(|x| bump.g(x));
        let prod: Vec<f64> = gv.iter().zip(kvals).map(|(a, b)| a * b).collect();
        bump.pairing = grid.weighted_sum(&prod);
        if best.as_ref().map_or(true, |b| bump.pairing < b.pairing) {
            best = Some(bump);
        }
    }
    best.ok_or_else(|| invalid("bump degree range is empty"))
}

fn margin_directions(n: usize, omega: &Direction, cfg: &CounterexampleConfig) -> Vec<Direction> {
    let mut dirs = vec![omega.clone()];
    dirs.extend((0..n).map(|i| Direction::axis(n, i)));
    dirs.par_extend((0..cfg.margin_directions).into_par_iter().map(|i| {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5ec7_10);
        rng.set_stream(i as u64);
        Direction::random(n, &mut rng)
    }));
    dirs
}
