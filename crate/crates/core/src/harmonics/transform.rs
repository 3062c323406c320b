use rayon::prelude::*;
use serde::Serialize;

use super::{
    expand, harmonic_dim, legendre_upto, radon_multiplier, zonal_scale, HarmonicExpansion,
    SourceDegree,
};
use crate::error::{invalid, Error, Result, Warning};
use crate::quadrature::pairwise_sum;
use crate::sphere::{dot, great_subsphere_grid, orthonormal_complement, Direction, SphereGrid};

/// Spherical Radon transform `Rf(ξ) = ∫_{S^{n-1} ∩ ξ^⊥} f`.
pub fn radon_transform<F>(f: F, xi: &Direction, resolution: usize) -> Result<f64>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let grid = great_subsphere_grid(&orthonormal_complement(xi), resolution)?;
    let v = grid.integrate(f);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite("Radon transform integrand".into()))
    }
}

/// Sphere restriction of `f̂` together with the positive-definiteness verdict.
#[derive(Debug, Clone, Serialize)]
pub struct FourierOnSphere {
    #[serde(skip)]
    pub expansion: HarmonicExpansion,
    pub source: SourceDegree,
    pub min_value: f64,
    pub argmin: Direction,
    /// `1e-6 × |degree-0 coefficient|` of the transform.
    pub tolerance: f64,
    pub positive_definite: bool,
    pub warnings: Vec<Warning>,
}

impl FourierOnSphere {
    /// Transforms an expansion and scans `evaluation` plus the coordinate axes.
    pub fn from_expansion(
        f: &HarmonicExpansion,
        source: SourceDegree,
        evaluation: &SphereGrid,
    ) -> Result<Self> {
        let n = f.dim();
        if evaluation.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: evaluation.dim(),
            });
        }
        let expansion = f.fourier(source)?;
        let mut points: Vec<Vec<f64>> = Vec::with_capacity(evaluation.len() + 2 * n);
        points.extend(evaluation.nodes().map(<[f64]>::to_vec));
        for i in 0..n {
            let axis = Direction::axis(n, i);
            points.push(axis.neg().into());
            points.push(axis.into());
        }
        let values: Vec<f64> = points.par_iter().map(|x| expansion.evaluate(x)).collect();
        let (imin, &min_value) =
            values
                .iter()
                .enumerate()
                .fold(
                    (0, &f64::INFINITY),
                    |best, cur| if cur.1 < best.1 { cur } else { best },
                );
        let tolerance = 1e-6 * expansion.coefficients(0)[0].abs();
        let mut warnings = f.warnings().to_vec();
        let frac = expansion.top_degree_fraction();
        if frac > 0.01 {
            warnings.push(Warning::Truncation {
                degree: expansion.max_degree(),
                mass_fraction: frac,
            });
        }
        Ok(Self {
            argmin: Direction::new(points[imin].clone())?,
            positive_definite: min_value >= -tolerance,
            expansion,
            source,
            min_value,
            tolerance,
            warnings,
        })
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.expansion.evaluate(x)
    }
}

/// Expands `values` on `grid` and transforms; the grid doubles as evaluation set.
pub fn fourier_on_sphere(
    values: &[f64],
    grid: &SphereGrid,
    source: SourceDegree,
    max_degree: usize,
) -> Result<FourierOnSphere> {
    let f = expand(values, grid, max_degree)?;
    FourierOnSphere::from_expansion(&f, source, grid)
}

/// Result of inverting the Radon transform degreewise.
#[derive(Debug, Clone)]
pub struct RadonInverse {
    pub expansion: HarmonicExpansion,
    /// Max over grid nodes of `|R g - values|`.
    pub residual: f64,
}

/// Expansion `g` with `R g ≈ values`, by division with `c_{n,m}`.
pub fn radon_inverse(values: &[f64], grid: &SphereGrid, max_degree: usize) -> Result<RadonInverse> {
    let n = grid.dim();
    let c0 = radon_multiplier(n, 0)?;
    for m in (0..=max_degree).step_by(2) {
        let c = radon_multiplier(n, m)?;
        if c.abs() < 1e-10 * c0.abs() {
            return Err(Error::IllConditioned {
                degree: m,
                value: c,
            });
        }
    }
    let f = expand(values, grid, max_degree)?;
    let fitted = f.evaluate_grid(grid);
    let residual = fitted
        .iter()
        .zip(values)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let expansion = f.scale_degrees(|m| Ok(1.0 / radon_multiplier(n, m)?))?;
    Ok(RadonInverse {
        expansion,
        residual,
    })
}

/// Coefficients of the zonal kernel `K(t) = sum_{m even ≤ M} mult(m) Z_m(t)`.
pub fn zonal_kernel<F>(n: usize, max_degree: usize, mult: F) -> Result<Vec<f64>>
where
    F: Fn(usize) -> Result<f64>,
{
    let mut k = vec![0.0; max_degree + 1];
    for m in (0..=max_degree).step_by(2) {
        k[m] = mult(m)? * zonal_scale(n, m);
    }
    Ok(k)
}

/// Even zonal kernel stored as a Chebyshev series in `u = t²` on `[0, 1]`.
///
/// A kernel built from even degrees `≤ M` is a polynomial of degree `M/2` in
/// `t²`, so the series is exact up to rounding.
#[derive(Debug, Clone)]
pub struct EvenZonalKernel {
    coeffs: Vec<f64>,
}

impl EvenZonalKernel {
    pub fn new<F>(n: usize, max_degree: usize, mult: F) -> Result<Self>
    where
        F: Fn(usize) -> Result<f64>,
    {
        let kernel = zonal_kernel(n, max_degree, mult)?;
        let count = max_degree / 2 + 1;
        let mut p = vec![0.0; max_degree + 1];
        let samples: Vec<f64> = (0..count)
            .map(|j| {
                let x = (std::f64::consts::PI * (j as f64 + 0.5) / count as f64).cos();
                let t = (0.5 * (x + 1.0)).sqrt();
                legendre_upto(n, max_degree, t, &mut p);
                kernel.iter().zip(&p).step_by(2).map(|(a, b)| a * b).sum()
            })
            .collect();
        let coeffs = (0..count)
            .map(|k| {
                let scale = if k == 0 { 1.0 } else { 2.0 } / count as f64;
                let terms: Vec<f64> = samples
                    .iter()
                    .enumerate()
                    .map(|(j, v)| {
                        v * (std::f64::consts::PI * k as f64 * (j as f64 + 0.5) / count as f64)
                            .cos()
                    })
                    .collect();
                scale * pairwise_sum(&terms)
            })
            .collect();
        Ok(Self { coeffs })
    }

    /// `K(t)` for `t ∈ [-1, 1]` by Clenshaw summation.
    pub fn eval(&self, t: f64) -> f64 {
        let x = 2.0 * t * t - 1.0;
        let (mut b1, mut b2) = (0.0, 0.0);
        for &c in self.coeffs.iter().skip(1).rev() {
            let b0 = 2.0 * x * b1 - b2 + c;
            b2 = b1;
            b1 = b0;
        }
        x * b1 - b2 + self.coeffs[0]
    }
}

/// Applies a degreewise multiplier to grid samples and evaluates at `targets`.
///
/// By the addition theorem, `sum_m mult(m) P_m f(ξ) = ∫ f(θ) K(θ·ξ) dθ` with
/// the zonal kernel `K`, so no explicit basis is needed and `M` may be large.
pub fn zonal_transform<F>(
    values: &[f64],
    grid: &SphereGrid,
    targets: &[Direction],
    max_degree: usize,
    mult: F,
) -> Result<Vec<f64>>
where
    F: Fn(usize) -> Result<f64>,
{
    let n = grid.dim();
    if grid.sphere_dim() != n || values.len() != grid.len() {
        return Err(invalid(
            "zonal transform needs node values on a full-sphere grid",
        ));
    }
    if targets.iter().any(|t| t.dim() != n) {
        return Err(invalid("target directions must live in the grid's space"));
    }
    if harmonic_dim(n, max_degree) == 0 {
        return Err(invalid("empty harmonic space"));
    }
    let kernel = EvenZonalKernel::new(n, max_degree, mult)?;
    let weighted: Vec<f64> = values
        .iter()
        .zip(grid.weights())
        .map(|(v, w)| v * w)
        .collect();
    Ok(targets
        .par_iter()
        .map(|xi| {
            let terms: Vec<f64> = grid
                .nodes()
                .zip(&weighted)
                .map(|(x, wv)| wv * kernel.eval(dot(x, xi.coords())))
                .collect();
            pairwise_sum(&terms)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chebyshev_kernel_matches_legendre_sum() {
        for (n, m) in [(3, 40), (4, 12), (5, 64)] {
            let mult = |k: usize| Ok(1.0 / (1.0 + k as f64));
            let coeffs = zonal_kernel(n, m, mult).unwrap();
            let kernel = EvenZonalKernel::new(n, m, mult).unwrap();
            let mut p = vec![0.0; m + 1];
            let mut scale = 0.0f64;
            let mut worst = 0.0f64;
            for i in 0..=200 {
                let t = -1.0 + i as f64 / 100.0;
                legendre_upto(n, m, t, &mut p);
                let exact: f64 = coeffs.iter().zip(&p).map(|(a, b)| a * b).sum();
                scale = scale.max(exact.abs());
                worst = worst.max((kernel.eval(t) - exact).abs());
            }
            assert!(worst <= 1e-12 * scale, "n={n} M={m}: {worst} vs {scale}");
        }
    }
}
