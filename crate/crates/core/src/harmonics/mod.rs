//! Even spherical-harmonic expansions, the spherical Radon transform and the
//! Fourier multipliers of even homogeneous distributions.
//!
//! Fourier convention: `f̂(ξ) = ∫ f(x) e^{-i x·ξ} dx`. For an even function
//! `r^{-p} Y_m(θ)` with `m` even the transform is `λ_{n,p,m} r^{-(n-p)} Y_m`,
//! and on degree-m harmonics the Radon transform acts as `c_{n,m} Y_m` with
//! `c_{n,m} = λ_{n,n-1,m} / π`.

mod basis;
mod transform;

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

pub use basis::{degree_block, DegreeBlock};
pub use transform::{
    fourier_on_sphere, radon_inverse, radon_transform, zonal_kernel, zonal_transform,
    EvenZonalKernel, FourierOnSphere, RadonInverse,
};

use crate::error::{invalid, Error, Result, Warning};
use crate::quadrature::pairwise_sum;
use crate::sphere::{sphere_area, SphereGrid};

/// Legendre polynomial of dimension `n`, normalized so `P_m(1) = 1`.
pub fn legendre(n: usize, m: usize, t: f64) -> f64 {
    let mut prev = 1.0;
    if m == 0 {
        return prev;
    }
    let mut cur = t;
    let nn = n as f64;
    for k in 1..m {
        let k = k as f64;
        let next = ((2.0 * k + nn - 2.0) * t * cur - k * prev) / (k + nn - 2.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// `P_0(t), ..., P_{max}(t)` written to `out`.
pub fn legendre_upto(n: usize, max: usize, t: f64, out: &mut [f64]) {
    out[0] = 1.0;
    if max == 0 {
        return;
    }
    out[1] = t;
    let nn = n as f64;
    for k in 1..max {
        let kf = k as f64;
        out[k + 1] = ((2.0 * kf + nn - 2.0) * t * out[k] - kf * out[k - 1]) / (kf + nn - 2.0);
    }
}

fn binomial(a: usize, b: usize) -> f64 {
    if b > a {
        return 0.0;
    }
    let b = b.min(a - b);
    (0..b).fold(1.0, |acc, i| acc * (a - i) as f64 / (i + 1) as f64)
}

/// Dimension of the space of degree-m spherical harmonics on `S^{n-1}`.
pub fn harmonic_dim(n: usize, m: usize) -> usize {
    let v = binomial(m + n - 1, n - 1)
        - if m >= 2 {
            binomial(m + n - 3, n - 1)
        } else {
            0.0
        };
    v.round() as usize
}

/// `N(n,m) / |S^{n-1}|`, so that `Z_m(t) = zonal_scale * P_m(t)` reproduces degree m.
pub fn zonal_scale(n: usize, m: usize) -> f64 {
    harmonic_dim(n, m) as f64 / sphere_area(n)
}

/// Eigenvalue `c_{n,m}` of the spherical Radon transform on degree-m harmonics.
pub fn radon_multiplier(n: usize, m: usize) -> Result<f64> {
    if n < 3 {
        return Err(invalid(format!("Radon multiplier needs n >= 3, got {n}")));
    }
    if m % 2 == 1 {
        return Err(Error::OddDegree(m));
    }
    // P_{2k}(0) = (-1)^k (1/2)_k / ((n-1)/2)_k
    let a = 0.5 * (n as f64 - 1.0);
    let p0 = (0..m / 2).fold(1.0, |acc, i| -acc * (0.5 + i as f64) / (a + i as f64));
    Ok(sphere_area(n - 1) * p0)
}

/// `λ_{n,p,m}` with `(r^{-p} Y_m)^ = λ r^{-(n-p)} Y_m`, for `p ∈ {1, n-1}`.
pub fn fourier_multiplier(n: usize, p: f64, m: usize) -> Result<f64> {
    let nf = n as f64;
    if (p - 1.0).abs() > 1e-12 && (p - (nf - 1.0)).abs() > 1e-12 {
        return Err(invalid(format!(
            "Fourier multiplier supports p = 1 or p = n - 1, got p = {p}"
        )));
    }
    if m % 2 == 1 {
        return Err(Error::OddDegree(m));
    }
    let mf = m as f64;
    let sign = if (m / 2) % 2 == 0 { 1.0 } else { -1.0 };
    let log = 0.5 * nf * std::f64::consts::PI.ln()
        + (nf - p) * std::f64::consts::LN_2
        + ln_gamma(0.5 * (mf + nf - p))
        - ln_gamma(0.5 * (mf + p));
    Ok(sign * log.exp())
}

/// Homogeneity of the function whose sphere restriction is being transformed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceDegree {
    /// Degree -1; the transform has degree -(n-1).
    MinusOne,
    /// Degree -(n-1); the transform has degree -1.
    MinusNPlusOne,
}

impl SourceDegree {
    pub fn p(self, n: usize) -> f64 {
        match self {
            SourceDegree::MinusOne => 1.0,
            SourceDegree::MinusNPlusOne => n as f64 - 1.0,
        }
    }

    pub fn degree(self, n: usize) -> i64 {
        -(self.p(n) as i64)
    }

    pub fn multiplier(self, n: usize, m: usize) -> Result<f64> {
        fourier_multiplier(n, self.p(n), m)
    }
}

/// Even spherical-harmonic expansion up to degree `max_degree`.
#[derive(Debug, Clone)]
pub struct HarmonicExpansion {
    n: usize,
    max_degree: usize,
    blocks: Vec<Arc<DegreeBlock>>,
    coeffs: Vec<Vec<f64>>,
    pole_weights: Vec<Vec<f64>>,
    warnings: Vec<Warning>,
}

impl HarmonicExpansion {
    /// Builds an expansion from coefficients listed per even degree `0, 2, ..., M`.
    pub fn from_coefficients(n: usize, max_degree: usize, coeffs: Vec<Vec<f64>>) -> Result<Self> {
        if max_degree % 2 == 1 {
            return Err(invalid(format!(
                "max degree must be even, got {max_degree}"
            )));
        }
        let blocks = (0..=max_degree)
            .step_by(2)
            .map(|m| degree_block(n, m))
            .collect::<Result<Vec<_>>>()?;
        if coeffs.len() != blocks.len() {
            return Err(invalid("one coefficient vector per even degree"));
        }
        for (b, c) in blocks.iter().zip(&coeffs) {
            if b.dim() != c.len() {
                return Err(Error::DimensionMismatch {
                    expected: b.dim(),
                    got: c.len(),
                });
            }
        }
        let pole_weights = blocks
            .iter()
            .zip(&coeffs)
            .map(|(b, c)| b.apply_transpose(c))
            .collect();
        Ok(Self {
            n,
            max_degree,
            blocks,
            coeffs,
            pole_weights,
            warnings: Vec::new(),
        })
    }

    pub fn zero(n: usize, max_degree: usize) -> Result<Self> {
        let coeffs = (0..=max_degree)
            .step_by(2)
            .map(|m| vec![0.0; harmonic_dim(n, m)])
            .collect();
        Self::from_coefficients(n, max_degree, coeffs)
    }

    /// Single basis function `Y_{m,index}`.
    pub fn basis_function(n: usize, max_degree: usize, m: usize, index: usize) -> Result<Self> {
        let mut e = Self::zero(n, max_degree)?;
        if m % 2 == 1 || m > max_degree || index >= harmonic_dim(n, m) {
            return Err(invalid(format!("no basis function ({m}, {index})")));
        }
        e.coeffs[m / 2][index] = 1.0;
        Self::from_coefficients(n, max_degree, e.coeffs)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn warnings(&self) -> &[Warning] {
        &self.warnings
    }

    pub(crate) fn push_warning(&mut self, w: Warning) {
        self.warnings.push(w);
    }

    /// Coefficients of degree `m` (empty for odd or out-of-range degrees).
    pub fn coefficients(&self, m: usize) -> &[f64] {
        if m % 2 == 1 || m > self.max_degree {
            &[]
        } else {
            &self.coeffs[m / 2]
        }
    }

    pub fn all_coefficients(&self) -> &[Vec<f64>] {
        &self.coeffs
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        let mut total = 0.0;
        for (b, d) in self.blocks.iter().zip(&self.pole_weights) {
            let mut s = 0.0;
            for (j, dj) in d.iter().enumerate() {
                s += dj * legendre(self.n, b.degree(), crate::sphere::dot(x, b.pole(j)));
            }
            total += zonal_scale(self.n, b.degree()) * s;
        }
        total
    }

    pub fn evaluate_grid(&self, grid: &SphereGrid) -> Vec<f64> {
        grid.map(|x| self.evaluate(x))
    }

    /// `sum c^2`, the squared L2 norm of the represented function.
    pub fn norm_sq(&self) -> f64 {
        let sq: Vec<f64> = self.coeffs.iter().flatten().map(|c| c * c).collect();
        pairwise_sum(&sq)
    }

    /// Share of `sum c^2` carried by the top retained degree.
    pub fn top_degree_fraction(&self) -> f64 {
        let total = self.norm_sq();
        if total == 0.0 {
            return 0.0;
        }
        let top: f64 = self.coeffs.last().unwrap().iter().map(|c| c * c).sum();
        top / total
    }

    /// `sum_j c_j d_j` over matching degrees, i.e. the L2 pairing.
    pub fn inner(&self, other: &Self) -> f64 {
        let terms: Vec<f64> = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| x * y))
            .collect();
        pairwise_sum(&terms)
    }

    /// Multiplies degree-m coefficients by `mult(m)`.
    pub fn scale_degrees<F: Fn(usize) -> Result<f64>>(&self, mult: F) -> Result<Self> {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let s = mult(2 * k)?;
                Ok(c.iter().map(|v| v * s).collect())
            })
            .collect::<Result<Vec<_>>>()?;
        let mut out = Self::from_coefficients(self.n, self.max_degree, coeffs)?;
        out.warnings = self.warnings.clone();
        Ok(out)
    }

    /// Sphere restriction of the Fourier transform of the homogeneous extension.
    pub fn fourier(&self, source: SourceDegree) -> Result<Self> {
        self.scale_degrees(|m| source.multiplier(self.n, m))
    }

    /// Spherical Radon transform.
    pub fn radon(&self) -> Result<Self> {
        self.scale_degrees(|m| radon_multiplier(self.n, m))
    }

    /// Pointwise sum of two expansions of the same shape.
    pub fn add(&self, other: &Self, factor: f64) -> Result<Self> {
        if self.n != other.n || self.max_degree != other.max_degree {
            return Err(invalid("expansions differ in dimension or degree"));
        }
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + factor * y).collect())
            .collect();
        Self::from_coefficients(self.n, self.max_degree, coeffs)
    }
}

/// Odd-part threshold above which an input is rejected as not even.
pub const ODD_REJECT: f64 = 1e-6;
/// Odd-part threshold above which a warning is attached.
pub const ODD_WARN: f64 = 1e-8;

/// Expands node values of an even function in the orthonormal harmonic basis.
///
/// The evenness check bounds the odd part of the samples in relative L2 norm,
/// which dominates every odd-degree projection.
pub fn expand(values: &[f64], grid: &SphereGrid, max_degree: usize) -> Result<HarmonicExpansion> {
    let n = grid.dim();
    if grid.sphere_dim() != n {
        return Err(invalid("expansion requires a grid on the full sphere"));
    }
    if values.len() != grid.len() {
        return Err(Error::DimensionMismatch {
            expected: grid.len(),
            got: values.len(),
        });
    }
    if max_degree % 2 == 1 {
        return Err(invalid(format!(
            "max degree must be even, got {max_degree}"
        )));
    }
    if 2 * max_degree > grid.spec().resolution {
        return Err(invalid(format!(
            "degree {max_degree} needs grid resolution >= {}, got {}",
            2 * max_degree,
            grid.spec().resolution
        )));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("expansion input".into()));
    }
    let odd = grid.odd_fraction(values);
    if odd > ODD_REJECT {
        return Err(Error::NotEven(odd));
    }

    let blocks = (0..=max_degree)
        .step_by(2)
        .map(|m| degree_block(n, m))
        .collect::<Result<Vec<_>>>()?;
    let offsets: Vec<usize> = blocks
        .iter()
        .scan(0, |acc, b| {
            let start = *acc;
            *acc += b.dim();
            Some(start)
        })
        .collect();
    let total: usize = blocks.iter().map(|b| b.dim()).sum();

    const CHUNK: usize = 512;
    let partials: Vec<Vec<f64>> = (0..grid.len().div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![0.0; total];
            let mut z = vec![0.0; total];
            for i in c * CHUNK..((c + 1) * CHUNK).min(grid.len()) {
                let wf = grid.weight(i) * values[i];
                for (b, &off) in blocks.iter().zip(&offsets) {
                    b.kernel_row(grid.node(i), &mut z[off..off + b.dim()]);
                }
                acc.iter_mut().zip(&z).for_each(|(a, zj)| *a += wf * zj);
            }
            acc
        })
        .collect();
    let mut column = vec![0.0; partials.len()];
    let projections: Vec<f64> = (0..total)
        .map(|j| {
            column
                .iter_mut()
                .zip(&partials)
                .for_each(|(c, p)| *c = p[j]);
            pairwise_sum(&column)
        })
        .collect();
    let coeffs = blocks
        .iter()
        .zip(&offsets)
        .map(|(b, &off)| b.apply(&projections[off..off + b.dim()]))
        .collect();
    let mut e = HarmonicExpansion::from_coefficients(n, max_degree, coeffs)?;
    if odd > ODD_WARN {
        e.push_warning(Warning::OddResidual { relative: odd });
    }
    Ok(e)
}

/// Expands a sphere function evaluated at the grid nodes.
pub fn expand_fn<F>(f: F, grid: &SphereGrid, max_degree: usize) -> Result<HarmonicExpansion>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    expand(&grid.map(f), grid, max_degree)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::build_sphere_grid;
    use std::f64::consts::PI;

    #[test]
    fn dimensions_of_harmonic_spaces() {
        assert_eq!(harmonic_dim(3, 4), 9);
        assert_eq!(harmonic_dim(2, 5), 2);
        assert_eq!(harmonic_dim(4, 2), 9);
        let total5: usize = (0..=6).step_by(2).map(|m| harmonic_dim(5, m)).sum();
        assert_eq!(total5, 210);
        let total4: usize = (0..=8).step_by(2).map(|m| harmonic_dim(4, m)).sum();
        assert_eq!(total4, 165);
    }

    #[test]
    fn legendre_matches_classical_polynomials() {
        let t: f64 = 0.37;
        assert!((legendre(3, 2, t) - 0.5 * (3.0 * t * t - 1.0)).abs() < 1e-15);
        // Chebyshev for n = 2
        assert!((legendre(2, 4, t) - (4.0 * t.acos()).cos()).abs() < 1e-14);
        let mut out = [0.0; 7];
        legendre_upto(5, 6, t, &mut out);
        for (m, v) in out.iter().enumerate() {
            assert!((v - legendre(5, m, t)).abs() < 1e-15);
        }
    }

    #[test]
    fn multiplier_values() {
        assert!((radon_multiplier(3, 0).unwrap() - 2.0 * PI).abs() < 1e-14);
        assert!((radon_multiplier(3, 2).unwrap() + PI).abs() < 1e-14);
        assert!(matches!(radon_multiplier(3, 3), Err(Error::OddDegree(3))));
        assert!((fourier_multiplier(3, 1.0, 0).unwrap() - 4.0 * PI).abs() < 1e-13);
        assert!(fourier_multiplier(3, 1.0, 2).unwrap() < 0.0);
        assert!(fourier_multiplier(5, 2.0, 0).is_err());
        for n in 3..=6 {
            for m in (0..=10).step_by(2) {
                let a = fourier_multiplier(n, 1.0, m).unwrap();
                let b = fourier_multiplier(n, n as f64 - 1.0, m).unwrap();
                let two_pi_n = (2.0 * PI).powi(n as i32);
                assert!((a * b / two_pi_n - 1.0).abs() < 1e-12);
                let c = radon_multiplier(n, m).unwrap();
                assert!((b / PI / c - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn constant_function_expansion() {
        let g = build_sphere_grid(3, 16).unwrap();
        let e = expand_fn(|_| 1.0, &g, 8).unwrap();
        assert!((e.coefficients(0)[0] - (4.0 * PI).sqrt()).abs() < 1e-10);
        for m in (2..=8).step_by(2) {
            assert!(e.coefficients(m).iter().all(|c| c.abs() < 1e-10));
        }
    }

    #[test]
    fn basis_is_orthonormal_under_quadrature() {
        for &(n, m) in &[(3usize, 4usize), (4, 6), (5, 4)] {
            let g = build_sphere_grid(n, 2 * m).unwrap();
            let block = degree_block(n, m).unwrap();
            let vals: Vec<Vec<f64>> = g.nodes().map(|x| block.evaluate(x)).collect();
            for a in 0..block.dim() {
                for b in 0..=a {
                    let v: Vec<f64> = vals.iter().map(|r| r[a] * r[b]).collect();
                    let ip = g.weighted_sum(&v);
                    let target = if a == b { 1.0 } else { 0.0 };
                    assert!((ip - target).abs() < 1e-9, "n={n} m={m} ({a},{b}) {ip}");
                }
            }
        }
    }

    #[test]
    fn odd_input_is_rejected() {
        let g = build_sphere_grid(3, 12).unwrap();
        let err = expand_fn(|x| 1.0 + x[0], &g, 4).unwrap_err();
        assert!(matches!(err, Error::NotEven(_)));
    }

    #[test]
    fn evaluation_is_exactly_even() {
        let g = build_sphere_grid(4, 12).unwrap();
        let e = expand_fn(|x| (x[0] * x[1]).cos() + x[2].abs(), &g, 6).unwrap();
        let x = [0.3, -0.5, 0.1, (1.0f64 - 0.35).sqrt()];
        let y: Vec<f64> = x.iter().map(|v| -v).collect();
        assert_eq!(e.evaluate(&x), e.evaluate(&y));
    }
}
