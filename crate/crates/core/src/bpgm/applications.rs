//! Consequences for gauge-power densities.
//!
//! With `f_{n-1} = ‖x‖_M` and `f_n = 1` the kernel of any body is `ρ_M`,
//! which gives a lower bound for section integrals of `‖x‖_M`, and an
//! iterated comparison over lower-dimensional sections.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use super::{default_degree, kernel, kernel_grid, kernel_values};
use crate::bodies::StarBody;
use crate::error::{invalid, Error, Result, Warning};
use crate::measures::{body_measure, section_measure_direct, subspace_section_integral, Density};
use crate::sphere::{random_frame, Direction, GridSpec, SphereGrid};

/// `Vol_n(B_p^n) = (2 Γ(1 + 1/p))^n / Γ(1 + n/p)`.
pub fn lp_ball_volume(n: usize, p: f64) -> f64 {
    let nf = n as f64;
    if p.is_infinite() {
        return 2f64.powi(n as i32);
    }
    (nf * (2f64.ln() + ln_gamma(1.0 + 1.0 / p)) - ln_gamma(1.0 + nf / p)).exp()
}

/// `Vol_{n-1}(B_p^{n-1}) / Vol_n(B_p^n)`.
pub fn lp_volume_ratio(n: usize, p: f64) -> f64 {
    lp_ball_volume(n - 1, p) / lp_ball_volume(n, p)
}

/// Worst direction for the section lower bound.
#[derive(Debug, Clone, Serialize)]
pub struct SectionBound {
    pub direction: Direction,
    /// `∫_{K ∩ ξ^⊥} ‖x‖_M dx`.
    pub lhs: f64,
    /// `(n-1)/n · Vol_{n-1}(M ∩ ξ^⊥) / Vol_n(M) · Vol_n(K)`.
    pub rhs: f64,
    /// `max_ξ (lhs - rhs)` over the sampled directions.
    pub slack: f64,
    pub volume_k: f64,
    pub volume_m: f64,
    pub m_positive_definite: bool,
    pub warnings: Vec<Warning>,
}

/// Largest `lhs - rhs` over `directions`; the bound asserts it is nonnegative
/// whenever `ρ_M` is positive definite.
pub fn section_integral_lower_bound(
    k: &StarBody,
    m: &StarBody,
    directions: &[Direction],
    spec: GridSpec,
    grid: &SphereGrid,
) -> Result<SectionBound> {
    let n = k.dim();
    if m.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: m.dim(),
        });
    }
    if directions.is_empty() {
        return Err(invalid("at least one direction is required"));
    }
    let leb = Density::lebesgue();
    let gauge = Density::gauge_power(m, 1.0)?;
    let volume_k = body_measure(k, &leb, grid)?;
    let volume_m = body_measure(m, &leb, grid)?;
    let factor = (n - 1) as f64 / n as f64 * volume_k / volume_m;
    let sides: Vec<(f64, f64)> = directions
        .par_iter()
        .map(|xi| {
            let lhs = section_measure_direct(k, &gauge, xi, spec)?;
            let rhs = factor * section_measure_direct(m, &leb, xi, spec)?;
            Ok((lhs, rhs))
        })
        .collect::<Result<_>>()?;
    let (i, &(lhs, rhs)) = sides
        .iter()
        .enumerate()
        .fold((0, &(0.0, f64::INFINITY)), |b, c| {
            if c.1 .0 - c.1 .1 > b.1 .0 - b.1 .1 {
                c
            } else {
                b
            }
        });
    let degree = default_degree(n);
    let km = kernel(m, &leb, &leb, &kernel_grid(n, degree)?, degree)?;
    let mut warnings = km.transform.warnings.clone();
    if !km.positive_definite() {
        warnings.push(Warning::Note {
            message: "radial function of M is not positive definite; the bound may fail".into(),
        });
    }
    Ok(SectionBound {
        direction: directions[i].clone(),
        lhs,
        rhs,
        slack: lhs - rhs,
        volume_k,
        volume_m,
        m_positive_definite: km.positive_definite(),
        warnings,
    })
}

/// Kernel identity at one stage of the iteration.
#[derive(Debug, Clone, Serialize)]
pub struct StageCheck {
    pub stage: usize,
    /// Max over grid nodes of `|kernel / ρ_M - 1|`.
    pub max_relative_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct IteratedSectionReport {
    pub codim: usize,
    pub samples: usize,
    /// `min_H [∫_{L∩H} ‖x‖_M^k - ∫_{K∩H} ‖x‖_M^k]` over sampled `H ∈ G(n, n-k)`.
    pub worst_margin: f64,
    pub worst_frame: usize,
    pub hypothesis_holds: bool,
    pub volume_k: f64,
    pub volume_l: f64,
    pub conclusion_holds: bool,
    pub stages: Vec<StageCheck>,
    pub m_positive_definite: bool,
}

/// Compares `∫_{K∩H} ‖x‖_M^k` with `∫_{L∩H} ‖x‖_M^k` on random
/// `(n-k)`-dimensional subspaces, then `Vol_n(K)` with `Vol_n(L)`.
#[allow(clippy::too_many_arguments)]
pub fn iterated_section_comparison(
    k_body: &StarBody,
    l_body: &StarBody,
    m_body: &StarBody,
    codim: usize,
    samples: usize,
    seed: u64,
    spec: GridSpec,
    grid: &SphereGrid,
) -> Result<IteratedSectionReport> {
    let n = k_body.dim();
    if l_body.dim() != n || m_body.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: if l_body.dim() != n {
                l_body.dim()
            } else {
                m_body.dim()
            },
        });
    }
    if codim == 0 || codim + 1 >= n {
        return Err(invalid(format!(
            "codimension must satisfy 1 <= k < n-1, got {codim}"
        )));
    }
    let weight = Density::gauge_power(m_body, codim as f64)?;
    let margins: Vec<(f64, f64)> = (0..samples.max(1))
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let frame = random_frame(n, n - codim, &mut rng)?;
            let a = subspace_section_integral(k_body, &weight, &frame, spec)?;
            let b = subspace_section_integral(l_body, &weight, &frame, spec)?;
            Ok((b - a, b.abs()))
        })
        .collect::<Result<_>>()?;
    let (worst_frame, &(worst_margin, _)) =
        margins
            .iter()
            .enumerate()
            .fold((0, &(f64::INFINITY, 0.0)), |b, c| {
                if c.1 .0 < b.1 .0 {
                    c
                } else {
                    b
                }
            });
    let hypothesis_holds = margins.iter().all(|(m, s)| *m >= -1e-9 * s);

    let leb = Density::lebesgue();
    let volume_k = body_measure(k_body, &leb, grid)?;
    let volume_l = body_measure(l_body, &leb, grid)?;
    let rho_m = m_body.radial_samples(grid);
    let stages = (1..=codim)
        .rev()
        .map(|i| {
            let f_i = Density::gauge_power(m_body, (n - i) as f64)?;
            let f_prev = Density::gauge_power(m_body, (n - i + 1) as f64)?;
            let v = kernel_values(k_body, &f_i, &f_prev, grid)?;
            let err = v
                .iter()
                .zip(&rho_m)
                .map(|(a, b)| (a / b - 1.0).abs())
                .fold(0.0f64, f64::max);
            Ok(StageCheck {
                stage: i,
                max_relative_error: err,
            })
        })
        .collect::<Result<_>>()?;
    let degree = default_degree(n);
    let km = kernel(m_body, &leb, &leb, &kernel_grid(n, degree)?, degree)?;
    Ok(IteratedSectionReport {
        codim,
        samples: margins.len(),
        worst_margin,
        worst_frame,
        hypothesis_holds,
        volume_k,
        volume_l,
        conclusion_holds: volume_k <= volume_l * (1.0 + 1e-9),
        stages,
        m_positive_definite: km.positive_definite(),
    })
}
