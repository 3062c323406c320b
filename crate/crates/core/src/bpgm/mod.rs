//! Busemann–Petty comparisons for general measures.
//!
//! [`verify_bpgm`] checks the affirmative side: section domination, the
//! ratio monotonicity condition and positive definiteness of the kernel
//! `‖x‖_K^{-1} f_n(x/‖x‖_K) / f_{n-1}(x/‖x‖_K)`. [`construct_counterexample`]
//! builds a convex body whose sections are all smaller but whose measure is
//! larger, once that kernel fails to be positive definite.

mod applications;
mod counterexample;

use rayon::prelude::*;
use serde::Serialize;

pub use applications::{
    lp_volume_ratio, iterated_section_comparison, lp_ball_volume, section_integral_lower_bound,
    IteratedSectionReport, SectionBound, StageCheck,
};
pub use counterexample::{
    construct_counterexample, Attempt, CounterexampleConfig, CounterexampleResult, OmegaDescriptor,
    RadialSamples, ZonalBump,
};

use crate::bodies::StarBody;
use crate::error::{invalid, Error, Result, Warning};
use crate::harmonics::{fourier_on_sphere, FourierOnSphere, SourceDegree};
use crate::measures::{
    body_measure, ratio_monotone_check, section_measure_direct, Density, RatioCheck,
};
use crate::quadrature::RadialRule;
use crate::sphere::{Direction, GridSpec, SphereGrid};

/// Both sides of the one-dimensional inequality behind the section comparisons.
#[derive(Debug, Clone, Serialize)]
pub struct ElementaryResidual {
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs`, integrated directly as `∫_a^b t^{n-2} (t α - c β) dt`.
    pub residual: f64,
    /// `t α(t) / β(t)` was nondecreasing on the samples.
    pub monotone: bool,
    /// Most negative increment of `t α / β` between consecutive samples.
    pub worst_increment: f64,
}

/// Residual of
/// `∫_0^a t^{n-1}α - c ∫_0^a t^{n-2}β ≤ ∫_0^b t^{n-1}α - c ∫_0^b t^{n-2}β`,
/// `c = a α(a)/β(a)`. A monotonicity failure is flagged, not raised.
pub fn elementary_inequality_residual<A, B>(
    alpha: A,
    beta: B,
    a: f64,
    b: f64,
    n: usize,
) -> Result<ElementaryResidual>
where
    A: Fn(f64) -> f64,
    B: Fn(f64) -> f64,
{
    if !(a > 0.0 && b > 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(invalid(format!(
            "a and b must be positive, got a={a}, b={b}"
        )));
    }
    if n < 2 {
        return Err(invalid(format!("dimension must be >= 2, got {n}")));
    }
    let top = a.max(b);
    let samples = 1024;
    let mut prev: Option<f64> = None;
    let (mut worst, mut scale) = (f64::INFINITY, 0.0f64);
    for j in 1..=samples {
        let t = top * j as f64 / samples as f64;
        let bt = beta(t);
        if !(bt > 0.0) {
            return Err(Error::ZeroDensity {
                theta: Vec::new(),
                t,
            });
        }
        let r = t * alpha(t) / bt;
        scale = scale.max(r.abs());
        if let Some(p) = prev {
            worst = worst.min(r - p);
        }
        prev = Some(r);
    }
    let rule = RadialRule::default();
    let c = a * alpha(a) / beta(a);
    let e1 = (n - 1) as i32;
    let e2 = (n - 2) as i32;
    let ia = |x: f64| rule.integrate(0.0, x, |t| t.powi(e1) * alpha(t));
    let ib = |x: f64| rule.integrate(0.0, x, |t| t.powi(e2) * beta(t));
    let lhs = ia(a)? - c * ib(a)?;
    let rhs = ia(b)? - c * ib(b)?;
    let integrand = |t: f64| t.powi(e2) * (t * alpha(t) - c * beta(t));
    let residual = if b >= a {
        rule.integrate(a, b, integrand)?
    } else {
        -rule.integrate(b, a, integrand)?
    };
    Ok(ElementaryResidual {
        lhs,
        rhs,
        residual,
        monotone: worst >= -1e-12 * scale,
        worst_increment: worst,
    })
}

/// `ρ_K(θ) f_n(ρ_K θ) / f_{n-1}(ρ_K θ)` at every grid node.
pub fn kernel_values(
    body: &StarBody,
    f_n: &Density,
    f_n1: &Density,
    grid: &SphereGrid,
) -> Result<Vec<f64>> {
    if grid.dim() != body.dim() {
        return Err(Error::DimensionMismatch {
            expected: body.dim(),
            got: grid.dim(),
        });
    }
    grid.try_map(|theta| {
        let rho = body.radial(theta);
        let x: Vec<f64> = theta.iter().map(|v| v * rho).collect();
        let den = f_n1.eval(&x);
        if !(den > 0.0) {
            return Err(Error::ZeroDensity {
                theta: theta.to_vec(),
                t: rho,
            });
        }
        crate::error::check_finite(rho * f_n.eval(&x) / den, "kernel value")
    })
}

/// Degree -1 kernel of a body and a pair of densities, with its transform.
#[derive(Debug, Clone)]
pub struct KernelFunction {
    pub values: Vec<f64>,
    pub transform: FourierOnSphere,
}

impl KernelFunction {
    pub fn positive_definite(&self) -> bool {
        self.transform.positive_definite
    }
}

pub fn kernel(
    body: &StarBody,
    f_n: &Density,
    f_n1: &Density,
    grid: &SphereGrid,
    max_degree: usize,
) -> Result<KernelFunction> {
    let values = kernel_values(body, f_n, f_n1, grid)?;
    let transform = fourier_on_sphere(&values, grid, SourceDegree::MinusOne, max_degree)?;
    Ok(KernelFunction { values, transform })
}

/// Default expansion degree for positive-definiteness verdicts.
pub fn default_degree(n: usize) -> usize {
    if n <= 4 {
        8
    } else {
        6
    }
}

/// Gauss–Jacobi grid for expanding a kernel to degree `max_degree`,
/// oversampled to resolution `4 max_degree` (at least 24).
pub fn kernel_grid(n: usize, max_degree: usize) -> Result<SphereGrid> {
    GridSpec::jacobi((4 * max_degree).max(24)).build(n)
}

/// Pair of bodies and densities to compare.
#[derive(Debug, Clone)]
pub struct BpInstance {
    pub k: StarBody,
    pub l: StarBody,
    pub f_n: Density,
    pub f_n1: Density,
    /// Full-sphere grid for body measures.
    pub grid: SphereGrid,
    /// Subsphere rule for section measures.
    pub section_spec: GridSpec,
    /// Directions on which section domination is checked.
    pub directions: Vec<Direction>,
    /// Expansion degree for the kernel transform.
    pub max_degree: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct BpgmReport {
    /// `min_ξ [μ_{n-1}(L ∩ ξ^⊥) - μ_{n-1}(K ∩ ξ^⊥)]`.
    pub hypothesis_margin: f64,
    pub margin_direction: Direction,
    /// `μ_n(L) - μ_n(K)`.
    pub conclusion_gap: f64,
    pub measure_k: f64,
    pub measure_l: f64,
    pub ratio: RatioCheck,
    pub kernel_positive_definite: bool,
    pub kernel_min: f64,
    pub kernel_tolerance: f64,
    pub warnings: Vec<Warning>,
}

pub fn verify_bpgm(inst: &BpInstance) -> Result<BpgmReport> {
    let n = inst.k.dim();
    if inst.l.dim() != n || inst.grid.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: if inst.l.dim() != n {
                inst.l.dim()
            } else {
                inst.grid.dim()
            },
        });
    }
    if inst.directions.is_empty() {
        return Err(invalid("at least one section direction is required"));
    }
    let margins = section_margins(
        &inst.k,
        &inst.l,
        &inst.f_n1,
        &inst.directions,
        inst.section_spec,
    )?;
    let (i, &hypothesis_margin) = argmin(&margins);
    let measure_k = body_measure(&inst.k, &inst.f_n, &inst.grid)?;
    let measure_l = body_measure(&inst.l, &inst.f_n, &inst.grid)?;
    let rmax = inst
        .k
        .radial_range(&inst.grid)
        .1
        .max(inst.l.radial_range(&inst.grid).1);
    let ts: Vec<f64> = (1..=64).map(|j| 1.5 * rmax * j as f64 / 64.0).collect();
    let ratio = ratio_monotone_check(&inst.f_n, &inst.f_n1, &inst.grid, &ts)?;
    let kgrid = kernel_grid(n, inst.max_degree)?;
    let kern = kernel(&inst.k, &inst.f_n, &inst.f_n1, &kgrid, inst.max_degree)?;
    Ok(BpgmReport {
        hypothesis_margin,
        margin_direction: inst.directions[i].clone(),
        conclusion_gap: measure_l - measure_k,
        measure_k,
        measure_l,
        ratio,
        kernel_positive_definite: kern.positive_definite(),
        kernel_min: kern.transform.min_value,
        kernel_tolerance: kern.transform.tolerance,
        warnings: kern.transform.warnings.clone(),
    })
}

/// `μ_{n-1}(L ∩ ξ^⊥) - μ_{n-1}(K ∩ ξ^⊥)` for every direction.
pub fn section_margins(
    k: &StarBody,
    l: &StarBody,
    f: &Density,
    directions: &[Direction],
    spec: GridSpec,
) -> Result<Vec<f64>> {
    directions
        .par_iter()
        .map(|xi| {
            Ok(section_measure_direct(l, f, xi, spec)? - section_measure_direct(k, f, xi, spec)?)
        })
        .collect()
}

/// Smallest `r` such that `rL` dominates `K` in every listed section, to relative 1e-12.
pub fn dominating_scale(
    k: &StarBody,
    l: &StarBody,
    f: &Density,
    directions: &[Direction],
    spec: GridSpec,
) -> Result<f64> {
    let n = k.dim();
    let sk: Vec<f64> = directions
        .par_iter()
        .map(|xi| section_measure_direct(k, f, xi, spec))
        .collect::<Result<_>>()?;
    let sl: Vec<f64> = directions
        .par_iter()
        .map(|xi| section_measure_direct(l, f, xi, spec))
        .collect::<Result<_>>()?;
    let ratio = sk
        .iter()
        .zip(&sl)
        .map(|(a, b)| a / b)
        .fold(0.0f64, f64::max);
    if let Some(s) = f.homogeneity() {
        return Ok(ratio.powf(1.0 / ((n - 1) as f64 + s)));
    }
    let guess = ratio.powf(1.0 / (n - 1) as f64);
    let dominated = |r: f64| -> Result<bool> {
        let l = l.scaled(r)?;
        directions
            .par_iter()
            .zip(&sk)
            .map(|(xi, a)| Ok(section_measure_direct(&l, f, xi, spec)? >= *a))
            .try_reduce(|| true, |x, y| Ok(x && y))
    };
    let (mut lo, mut hi) = (guess, guess);
    while dominated(lo)? {
        lo *= 0.5;
    }
    while !dominated(hi)? {
        hi *= 2.0;
        if hi > 1e6 * guess {
            return Err(Error::Bracket("no dominating scale found".into()));
        }
    }
    while hi - lo > 1e-12 * hi {
        let mid = 0.5 * (lo + hi);
        if dominated(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// One direction per antipodal pair of `grid`.
pub fn half_directions(grid: &SphereGrid) -> Result<Vec<Direction>> {
    (0..grid.len())
        .step_by(2)
        .map(|i| Direction::normalized(grid.node(i).to_vec()))
        .collect()
}

fn argmin(values: &[f64]) -> (usize, &f64) {
    values.iter().enumerate().fold(
        (0, &f64::INFINITY),
        |best, cur| if cur.1 < best.1 { cur } else { best },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bodies::{ellipsoid, lp_ball};

    #[test]
    fn elementary_examples() {
        let r = elementary_inequality_residual(|_| 1.0, |_| 1.0, 1.3, 1.3, 4).unwrap();
        assert_eq!(r.residual, 0.0);
        assert!(r.monotone);
        let r = elementary_inequality_residual(|_| 1.0, |_| 1.0, 1.0, 2.0, 3).unwrap();
        assert!((r.lhs + 1.0 / 6.0).abs() < 1e-14);
        assert!((r.rhs - 2.0 / 3.0).abs() < 1e-14);
        assert!((r.residual - 5.0 / 6.0).abs() < 1e-14);
        let r =
            elementary_inequality_residual(|t| (-0.5 * t * t).exp(), |_| 1.0, 2.0, 1.0, 4).unwrap();
        assert!(!r.monotone);
    }

    #[test]
    fn kernel_reduces_to_radial_function_for_equal_densities() {
        let grid = kernel_grid(4, 4).unwrap();
        let body = ellipsoid(&[1.5, 1.0, 0.8, 1.2]).unwrap();
        let f = Density::gaussian();
        let v = kernel_values(&body, &f, &f, &grid).unwrap();
        for (i, x) in grid.nodes().enumerate() {
            assert!((v[i] / body.radial(x) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn kernel_is_gauge_of_m_for_gauge_weighted_lower_density() {
        let grid = kernel_grid(5, 4).unwrap();
        let m = lp_ball(5, 1.0).unwrap();
        let f_n1 = Density::gauge_power(&m, 1.0).unwrap();
        let k = lp_ball(5, 4.0).unwrap();
        let v = kernel_values(&k, &Density::lebesgue(), &f_n1, &grid).unwrap();
        for (i, x) in grid.nodes().enumerate() {
            assert!((v[i] / m.radial(x) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn lp_dichotomy_in_five_dimensions() {
        let m = default_degree(5);
        let grid = kernel_grid(5, m).unwrap();
        let f = Density::lebesgue();
        for (p, pd) in [(1.0, true), (2.0, true), (4.0, false), (8.0, false)] {
            let k = kernel(&lp_ball(5, p).unwrap(), &f, &f, &grid, m).unwrap();
            assert_eq!(k.positive_definite(), pd, "p = {p}");
        }
    }

    #[test]
    fn shrunken_body_satisfies_both_sides() {
        let l = ellipsoid(&[1.2, 1.0, 0.9]).unwrap();
        let grid = GridSpec::jacobi(24).build(3).unwrap();
        let dirs = half_directions(&GridSpec::jacobi(6).build(3).unwrap()).unwrap();
        let inst = BpInstance {
            k: l.scaled(0.9).unwrap(),
            l,
            f_n: Density::lebesgue(),
            f_n1: Density::lebesgue(),
            grid,
            section_spec: GridSpec::jacobi(24),
            directions: dirs,
            max_degree: 6,
        };
        let r = verify_bpgm(&inst).unwrap();
        assert!(r.hypothesis_margin > 0.0);
        assert!(r.conclusion_gap > 0.0);
        assert!(r.ratio.holds);
        assert!(r.kernel_positive_definite);
    }

    #[test]
    fn dominating_scale_matches_homogeneity() {
        let k = ellipsoid(&[1.3, 0.8, 1.0]).unwrap();
        let l = lp_ball(3, 2.0).unwrap();
        let dirs = half_directions(&GridSpec::jacobi(6).build(3).unwrap()).unwrap();
        let spec = GridSpec::jacobi(16);
        let r = dominating_scale(&k, &l, &Density::lebesgue(), &dirs, spec).unwrap();
        let m = section_margins(
            &k,
            &l.scaled(r * (1.0 + 1e-9)).unwrap(),
            &Density::lebesgue(),
            &dirs,
            spec,
        )
        .unwrap();
        assert!(m.iter().all(|v| *v >= 0.0));
        let rg = dominating_scale(&k, &l, &Density::gaussian(), &dirs, spec).unwrap();
        let m = section_margins(
            &k,
            &l.scaled(rg).unwrap(),
            &Density::gaussian(),
            &dirs,
            spec,
        )
        .unwrap();
        assert!(m.iter().all(|v| *v >= 0.0));
        assert!(m.iter().fold(f64::INFINITY, |a, v| a.min(*v)) < 1e-9);
    }
}
