//! Quadrature on unit spheres and great subspheres, plus orthonormal frames.
//!
//! Every grid stores its nodes as antipodal pairs `x, -x` in adjacent slots
//! with equal weights. Combined with [`pairwise_sum`] this makes odd
//! integrands vanish exactly and keeps every reduction bit-reproducible.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{invalid, Error, Result};
use crate::quadrature::{gauss_gegenbauer, gauss_legendre, pairwise_sum};

mod cells;

/// Surface area of the unit sphere `S^{d-1}` in `R^d`.
pub fn sphere_area(d: usize) -> f64 {
    let h = 0.5 * d as f64;
    2.0 * (h * PI.ln() - ln_gamma(h)).exp()
}

/// Volume of the Euclidean unit ball in `R^d`.
pub fn ball_volume(d: usize) -> f64 {
    sphere_area(d) / d as f64
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// A point on the unit sphere `S^{n-1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Direction {
    coords: Vec<f64>,
}

impl Direction {
    /// Accepts coordinates whose norm is within 1e-6 of 1 and renormalizes.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(invalid("directions need at least two coordinates"));
        }
        let r = norm(&coords);
        if !r.is_finite() || (r - 1.0).abs() > 1e-6 {
            return Err(Error::NotUnit { norm: r });
        }
        Ok(Self {
            coords: coords.iter().map(|x| x / r).collect(),
        })
    }

    /// Normalizes any nonzero finite vector.
    pub fn normalized(coords: Vec<f64>) -> Result<Self> {
        let r = norm(&coords);
        if !(r > 0.0) || !r.is_finite() {
            return Err(invalid("cannot normalize a zero or non-finite vector"));
        }
        Self::new(coords.iter().map(|x| x / r).collect())
    }

    /// Coordinate axis `e_i` in `R^n`.
    pub fn axis(n: usize, i: usize) -> Self {
        let mut coords = vec![0.0; n];
        coords[i] = 1.0;
        Self { coords }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn neg(&self) -> Self {
        Self {
            coords: self.coords.iter().map(|x| -x).collect(),
        }
    }

    /// Uniformly distributed random direction.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        loop {
            let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            if let Ok(d) = Self::normalized(v) {
                return d;
            }
        }
    }
}

impl TryFrom<Vec<f64>> for Direction {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<Direction> for Vec<f64> {
    fn from(d: Direction) -> Self {
        d.coords
    }
}

impl AsRef<[f64]> for Direction {
    fn as_ref(&self) -> &[f64] {
        &self.coords
    }
}

/// Product quadrature families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    /// Gauss–Gegenbauer in `cos` of each polar angle, equispaced azimuth.
    /// Exact for polynomials of degree `<= resolution`.
    GaussJacobi,
    /// Gauss–Legendre panels aligned with the coordinate orthants. Spectrally
    /// accurate for integrands that are smooth inside each orthant, such as
    /// `l_1`-type kinks, but not polynomially exact.
    Orthant,
}

/// Rule plus resolution; builds a grid for any sphere dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridSpec {
    pub rule: Rule,
    pub resolution: usize,
}

impl GridSpec {
    pub fn jacobi(resolution: usize) -> Self {
        Self {
            rule: Rule::GaussJacobi,
            resolution,
        }
    }

    pub fn orthant(resolution: usize) -> Self {
        Self {
            rule: Rule::Orthant,
            resolution,
        }
    }

    pub fn build(&self, n: usize) -> Result<SphereGrid> {
        build_grid(n, *self)
    }
}

/// Nodes and weights on `S^{d-1}`, possibly embedded in a larger `R^n`.
#[derive(Debug, Clone)]
pub struct SphereGrid {
    ambient: usize,
    sphere_dim: usize,
    spec: GridSpec,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl SphereGrid {
    /// Ambient dimension of the node coordinates.
    pub fn dim(&self) -> usize {
        self.ambient
    }

    /// `d` such that the grid discretizes a great `S^{d-1}`.
    pub fn sphere_dim(&self) -> usize {
        self.sphere_dim
    }

    pub fn spec(&self) -> GridSpec {
        self.spec
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.nodes[i * self.ambient..(i + 1) * self.ambient]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.nodes.chunks_exact(self.ambient)
    }

    /// Polynomial degree integrated exactly (`None` for the orthant rule).
    pub fn exact_degree(&self) -> Option<usize> {
        match self.spec.rule {
            Rule::GaussJacobi => Some(self.spec.resolution),
            Rule::Orthant => None,
        }
    }

    /// Evaluates `f` at every node in parallel, preserving node order.
    pub fn map<F>(&self, f: F) -> Vec<f64>
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        self.nodes.par_chunks_exact(self.ambient).map(&f).collect()
    }

    pub fn try_map<F>(&self, f: F) -> Result<Vec<f64>>
    where
        F: Fn(&[f64]) -> Result<f64> + Sync,
    {
        self.nodes.par_chunks_exact(self.ambient).map(&f).collect()
    }

    /// `sum_i w_i v_i` in the fixed pairwise order.
    pub fn weighted_sum(&self, values: &[f64]) -> f64 {
        assert_eq!(values.len(), self.len(), "one value per node");
        let terms: Vec<f64> = values
            .iter()
            .zip(&self.weights)
            .map(|(v, w)| v * w)
            .collect();
        pairwise_sum(&terms)
    }

    pub fn integrate<F>(&self, f: F) -> f64
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        self.weighted_sum(&self.map(f))
    }

    pub fn try_integrate<F>(&self, f: F) -> Result<f64>
    where
        F: Fn(&[f64]) -> Result<f64> + Sync,
    {
        Ok(self.weighted_sum(&self.try_map(f)?))
    }

    /// Relative L2 norm of the odd part of node values.
    pub fn odd_fraction(&self, values: &[f64]) -> f64 {
        let mut odd = Vec::with_capacity(self.len() / 2);
        let mut all = Vec::with_capacity(self.len());
        for i in (0..self.len()).step_by(2) {
            let d = 0.5 * (values[i] - values[i + 1]);
            odd.push(2.0 * self.weights[i] * d * d);
            all.push(self.weights[i] * values[i] * values[i]);
            all.push(self.weights[i + 1] * values[i + 1] * values[i + 1]);
        }
        let total = pairwise_sum(&all);
        if total == 0.0 {
            0.0
        } else {
            (pairwise_sum(&odd) / total).sqrt()
        }
    }

    /// Applies a linear map column-wise: node `u` becomes `sum_j u_j b_j`.
    fn embed(self, basis: &[Vec<f64>], ambient: usize) -> SphereGrid {
        let d = self.ambient;
        let mut nodes = Vec::with_capacity(self.len() * ambient);
        for u in self.nodes.chunks_exact(d) {
            for k in 0..ambient {
                let mut s = 0.0;
                for j in 0..d {
                    s += u[j] * basis[j][k];
                }
                nodes.push(s);
            }
        }
        SphereGrid {
            ambient,
            sphere_dim: self.sphere_dim,
            spec: self.spec,
            nodes,
            weights: self.weights,
        }
    }
}

/// Default Gauss–Jacobi product grid on `S^{n-1}`.
pub fn build_sphere_grid(n: usize, resolution: usize) -> Result<SphereGrid> {
    build_grid(n, GridSpec::jacobi(resolution))
}

/// Orthant-aligned grid on `S^{n-1}`.
pub fn build_orthant_grid(n: usize, resolution: usize) -> Result<SphereGrid> {
    build_grid(n, GridSpec::orthant(resolution))
}

pub fn build_grid(n: usize, spec: GridSpec) -> Result<SphereGrid> {
    if n < 2 {
        return Err(invalid(format!("sphere grids need n >= 2, got {n}")));
    }
    if spec.resolution < 4 {
        return Err(invalid(format!(
            "grid resolution must be >= 4, got {}",
            spec.resolution
        )));
    }
    let (polar, azimuth) = match spec.rule {
        Rule::GaussJacobi => jacobi_factors(n, spec.resolution)?,
        Rule::Orthant => orthant_factors(n, spec.resolution)?,
    };
    Ok(assemble(n, spec, &polar, &azimuth))
}

// One-dimensional factor: (cos, sin, weight) triples.
type Factor = Vec<(f64, f64, f64)>;

fn jacobi_factors(n: usize, resolution: usize) -> Result<(Vec<Factor>, Factor)> {
    let count = resolution / 2 + 1;
    let mut polar = Vec::new();
    for k in 0..n.saturating_sub(2) {
        let j = (n - 2 - k) as f64;
        let rule = gauss_gegenbauer(count, 0.5 * (j - 1.0))?;
        polar.push(
            rule.nodes
                .iter()
                .zip(&rule.weights)
                .map(|(&t, &w)| (t, (1.0 - t * t).max(0.0).sqrt(), w))
                .collect(),
        );
    }
    let naz = 2 * count;
    let step = 2.0 * PI / naz as f64;
    let azimuth = (0..naz / 2)
        .map(|i| {
            let a = (i as f64 + 0.5) * step;
            (a.cos(), a.sin(), step)
        })
        .collect();
    Ok((polar, azimuth))
}

fn orthant_factors(n: usize, resolution: usize) -> Result<(Vec<Factor>, Factor)> {
    let count = resolution / 2 + 4;
    let gl = gauss_legendre(count)?;
    let quarter = 0.25 * PI;
    let panel = |lo: f64| -> Vec<(f64, f64)> {
        gl.nodes
            .iter()
            .zip(&gl.weights)
            .map(|(&x, &w)| (lo + quarter * (x + 1.0), quarter * w))
            .collect()
    };
    let mut polar = Vec::new();
    for k in 0..n.saturating_sub(2) {
        let j = (n - 2 - k) as i32;
        let mut f: Factor = Vec::new();
        for lo in [0.0, 0.5 * PI] {
            for (a, w) in panel(lo) {
                let s = a.sin();
                f.push((a.cos(), s, w * s.powi(j)));
            }
        }
        polar.push(f);
    }
    let mut azimuth = Vec::new();
    for lo in [0.0, 0.5 * PI] {
        for (a, w) in panel(lo) {
            azimuth.push((a.cos(), a.sin(), w));
        }
    }
    Ok((polar, azimuth))
}

// Builds the half grid with azimuth in (0, pi) and appends each node's antipode.
fn assemble(n: usize, spec: GridSpec, polar: &[Factor], azimuth: &Factor) -> SphereGrid {
    let half: usize = polar.iter().map(Vec::len).product::<usize>() * azimuth.len();
    let mut nodes = Vec::with_capacity(2 * half * n);
    let mut weights = Vec::with_capacity(2 * half);
    let mut idx = vec![0usize; polar.len()];
    let mut x = vec![0.0; n];
    loop {
        let mut scale = 1.0;
        let mut w = 1.0;
        for (level, &i) in idx.iter().enumerate() {
            let (c, s, wi) = polar[level][i];
            x[level] = scale * c;
            scale *= s;
            w *= wi;
        }
        for &(c, s, wa) in azimuth {
            x[n - 2] = scale * c;
            x[n - 1] = scale * s;
            nodes.extend_from_slice(&x);
            nodes.extend(x.iter().map(|v| -v));
            weights.push(w * wa);
            weights.push(w * wa);
        }
        // odometer over polar levels, last level fastest
        let mut level = polar.len();
        loop {
            if level == 0 {
                return SphereGrid {
                    ambient: n,
                    sphere_dim: n,
                    spec,
                    nodes,
                    weights,
                };
            }
            level -= 1;
            idx[level] += 1;
            if idx[level] < polar[level].len() {
                break;
            }
            idx[level] = 0;
        }
    }
}

/// Orthonormal basis of a subspace `H` of `R^n` together with its orthogonal complement.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceFrame {
    ambient: usize,
    basis: Vec<Vec<f64>>,
    complement: Vec<Vec<f64>>,
}

impl SubspaceFrame {
    /// Validates orthonormality of `basis ∪ complement` to 1e-12.
    pub fn new(basis: Vec<Vec<f64>>, complement: Vec<Vec<f64>>) -> Result<Self> {
        let ambient = basis
            .first()
            .or(complement.first())
            .map(Vec::len)
            .ok_or_else(|| invalid("empty frame"))?;
        let all: Vec<&Vec<f64>> = basis.iter().chain(&complement).collect();
        if all.len() != ambient || all.iter().any(|v| v.len() != ambient) {
            return Err(invalid("frame vectors must form a basis of R^n"));
        }
        for (i, a) in all.iter().enumerate() {
            for (j, b) in all.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                if (dot(a, b) - target).abs() > 1e-12 {
                    return Err(invalid("frame is not orthonormal"));
                }
            }
        }
        Ok(Self {
            ambient,
            basis,
            complement,
        })
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    /// Dimension of the subspace `H`.
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    pub fn complement(&self) -> &[Vec<f64>] {
        &self.complement
    }
}

/// Frame of the hyperplane `xi^⊥`, completed by a Householder reflection.
///
/// The reflection `I - 2 v v^T / v^T v` with `v = xi + sign(xi_1) e_1` swaps
/// `e_1` and `-sign(xi_1) xi`; its remaining columns span `xi^⊥`. The sign
/// choice keeps `|v|^2 >= 2`, so the completion is stable near `±e_1` and
/// returns exactly `e_2, ..., e_n` at `xi = e_1`.
pub fn orthonormal_complement(xi: &Direction) -> SubspaceFrame {
    let n = xi.dim();
    let x = xi.coords();
    let sign = if x[0] >= 0.0 { 1.0 } else { -1.0 };
    let mut v = x.to_vec();
    v[0] += sign;
    let vv = dot(&v, &v);
    let basis = (1..n)
        .map(|j| {
            let c = 2.0 * v[j] / vv;
            (0..n)
                .map(|i| if i == j { 1.0 } else { 0.0 } - c * v[i])
                .collect()
        })
        .collect();
    SubspaceFrame {
        ambient: n,
        basis,
        complement: vec![x.to_vec()],
    }
}

/// Uniformly random frame of a `dim`-dimensional subspace of `R^n`.
pub fn random_frame<R: Rng + ?Sized>(n: usize, dim: usize, rng: &mut R) -> Result<SubspaceFrame> {
    if dim == 0 || dim > n {
        return Err(invalid(format!(
            "subspace dimension {dim} out of range for n = {n}"
        )));
    }
    let mut vecs: Vec<Vec<f64>> = Vec::with_capacity(n);
    while vecs.len() < n {
        let mut v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        // two passes of modified Gram-Schmidt
        for _ in 0..2 {
            for u in &vecs {
                let c = dot(&v, u);
                v.iter_mut().zip(u).for_each(|(a, b)| *a -= c * b);
            }
        }
        let r = norm(&v);
        if r > 1e-6 {
            v.iter_mut().for_each(|a| *a /= r);
            vecs.push(v);
        }
    }
    let complement = vecs.split_off(dim);
    SubspaceFrame::new(vecs, complement)
}

/// Default grid on the great subsphere `S^{n-1} ∩ H`.
pub fn great_subsphere_grid(frame: &SubspaceFrame, resolution: usize) -> Result<SphereGrid> {
    subspace_grid(frame, GridSpec::jacobi(resolution))
}

/// Grid on `S^{n-1} ∩ H`. The orthant rule splits the subsphere along the
/// coordinate hyperplanes of the ambient space.
pub fn subspace_grid(frame: &SubspaceFrame, spec: GridSpec) -> Result<SphereGrid> {
    if frame.dim() < 2 {
        return Err(invalid(format!(
            "great subsphere needs subspace dimension >= 2, got {}",
            frame.dim()
        )));
    }
    match spec.rule {
        Rule::GaussJacobi => Ok(build_grid(frame.dim(), spec)?.embed(&frame.basis, frame.ambient)),
        Rule::Orthant => {
            if spec.resolution < 4 {
                return Err(invalid(format!(
                    "grid resolution must be >= 4, got {}",
                    spec.resolution
                )));
            }
            cells::cell_grid(&frame.basis, frame.ambient, spec)
        }
    }
}

/// `sum_i w_i f(theta_i)`.
pub fn integrate_on_grid<F>(grid: &SphereGrid, f: F) -> f64
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    grid.integrate(f)
}
