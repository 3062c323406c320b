//! Origin-symmetric star bodies described by their radial functions.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{invalid, Error, Result};
use crate::harmonics::{expand, HarmonicExpansion};
use crate::sphere::{norm, random_frame, Direction, GridSpec, Rule, SphereGrid};

/// User-supplied radial function; must be even and positive on the sphere.
pub trait RadialFunction: Send + Sync + fmt::Debug {
    fn radial(&self, theta: &[f64]) -> f64;
}

#[derive(Debug, Clone)]
enum Radial {
    Lp(f64),
    Ellipsoid(Vec<f64>),
    Expansion(Arc<HarmonicExpansion>),
    Scaled(Arc<StarBody>, f64),
    Linear(Arc<StarBody>, Vec<f64>),
    Custom(Arc<dyn RadialFunction>),
}

/// Origin-symmetric star body in `R^n`.
#[derive(Debug, Clone)]
pub struct StarBody {
    n: usize,
    label: String,
    radial: Radial,
}

/// `‖x‖_p`, scaled by the max coordinate for stability at large `p`.
pub fn lp_norm(x: &[f64], p: f64) -> f64 {
    let m = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if p.is_infinite() || m == 0.0 {
        return m;
    }
    let s: f64 = x.iter().map(|v| (v.abs() / m).powf(p)).sum();
    m * s.powf(1.0 / p)
}

/// `B_p^n` with `p ∈ (0, ∞]`.
pub fn lp_ball(n: usize, p: f64) -> Result<StarBody> {
    if n < 2 {
        return Err(invalid(format!("bodies need n >= 2, got {n}")));
    }
    if !(p > 0.0) {
        return Err(invalid(format!("l_p ball needs p > 0, got {p}")));
    }
    let label = if p.is_infinite() {
        format!("B_inf^{n}")
    } else {
        format!("B_{p}^{n}")
    };
    Ok(StarBody {
        n,
        label,
        radial: Radial::Lp(p),
    })
}

/// Axis-aligned ellipsoid with the given semi-axes.
pub fn ellipsoid(semi_axes: &[f64]) -> Result<StarBody> {
    if semi_axes.len() < 2 {
        return Err(invalid("ellipsoid needs at least two semi-axes"));
    }
    if semi_axes.iter().any(|a| !(*a > 0.0) || !a.is_finite()) {
        return Err(invalid("ellipsoid semi-axes must be positive and finite"));
    }
    let axes: Vec<String> = semi_axes.iter().map(|a| format!("{a}")).collect();
    Ok(StarBody {
        n: semi_axes.len(),
        label: format!("ellipsoid({})", axes.join(",")),
        radial: Radial::Ellipsoid(semi_axes.iter().map(|a| 1.0 / (a * a)).collect()),
    })
}

/// Random convex body with semi-axes in `[0.6, 1.6]`: a rotated ellipsoid, or
/// `B_p^n` with `p` uniform in `p_range`, stretched along the coordinate axes.
pub fn random_convex_body<R: Rng + ?Sized>(
    n: usize,
    p_range: (f64, f64),
    rng: &mut R,
) -> Result<StarBody> {
    if !(p_range.0 >= 1.0 && p_range.1 >= p_range.0) {
        return Err(invalid(format!(
            "convex lp balls need 1 <= p_min <= p_max, got {p_range:?}"
        )));
    }
    let axes: Vec<f64> = (0..n).map(|_| rng.random_range(0.6..=1.6)).collect();
    if rng.random_bool(0.5) {
        let frame = random_frame(n, n, rng)?;
        let u = frame.basis();
        let t: Vec<f64> = (0..n)
            .flat_map(|i| (0..n).map(move |k| (i, k)))
            .map(|(i, k)| u[k][i] * axes[k])
            .collect();
        lp_ball(n, 2.0)?.linear_image(&t)
    } else {
        let p = rng.random_range(p_range.0..=p_range.1);
        let mut t = vec![0.0; n * n];
        for (i, a) in axes.iter().enumerate() {
            t[i * n + i] = *a;
        }
        lp_ball(n, p)?.linear_image(&t)
    }
}

/// Body whose radial function is the even expansion of grid samples.
pub fn from_radial_samples(
    values: &[f64],
    grid: &SphereGrid,
    max_degree: usize,
) -> Result<StarBody> {
    if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(invalid(format!("radial sample {i} is not positive: {v}")));
    }
    let e = expand(values, grid, max_degree)?;
    if let Some(i) = e.evaluate_grid(grid).iter().position(|v| !(*v > 0.0)) {
        return Err(invalid(format!(
            "expanded radial function is not positive at node {i}"
        )));
    }
    Ok(StarBody {
        n: grid.dim(),
        label: format!("samples(M={max_degree})"),
        radial: Radial::Expansion(Arc::new(e)),
    })
}

impl StarBody {
    /// Wraps an arbitrary radial function.
    pub fn from_radial(n: usize, label: impl Into<String>, f: Arc<dyn RadialFunction>) -> Self {
        Self {
            n,
            label: label.into(),
            radial: Radial::Custom(f),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `ρ_K(θ)` for a unit vector `θ`.
    pub fn radial(&self, theta: &[f64]) -> f64 {
        match &self.radial {
            Radial::Lp(p) => 1.0 / lp_norm(theta, *p),
            Radial::Ellipsoid(inv) => {
                let q: f64 = theta.iter().zip(inv).map(|(t, a)| t * t * a).sum();
                1.0 / q.sqrt()
            }
            Radial::Expansion(e) => e.evaluate(theta),
            Radial::Scaled(base, r) => r * base.radial(theta),
            Radial::Linear(base, inv) => {
                let y = mat_vec(inv, theta, self.n);
                1.0 / base.gauge(&y)
            }
            Radial::Custom(f) => f.radial(theta),
        }
    }

    pub fn radial_samples(&self, grid: &SphereGrid) -> Vec<f64> {
        grid.map(|x| self.radial(x))
    }

    /// `‖x‖_K = |x| / ρ_K(x/|x|)` without the zero check.
    pub(crate) fn gauge(&self, x: &[f64]) -> f64 {
        let r = norm(x);
        if r == 0.0 {
            return 0.0;
        }
        match &self.radial {
            Radial::Lp(p) => lp_norm(x, *p),
            _ => {
                let u: Vec<f64> = x.iter().map(|v| v / r).collect();
                r / self.radial(&u)
            }
        }
    }

    /// Minkowski functional `min{α > 0 : x ∈ αK}`.
    pub fn minkowski_functional(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        if norm(x) == 0.0 {
            return Err(invalid("Minkowski functional is undefined at the origin"));
        }
        Ok(self.gauge(x))
    }

    /// `rK`.
    pub fn scaled(&self, r: f64) -> Result<StarBody> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(invalid(format!("scale factor must be positive, got {r}")));
        }
        Ok(StarBody {
            n: self.n,
            label: format!("{}*{r}", self.label),
            radial: Radial::Scaled(Arc::new(self.clone()), r),
        })
    }

    /// `TK` for an invertible `n × n` matrix given row-major.
    pub fn linear_image(&self, matrix: &[f64]) -> Result<StarBody> {
        let n = self.n;
        if matrix.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: matrix.len(),
            });
        }
        let m = nalgebra::DMatrix::from_row_slice(n, n, matrix);
        let inv = m
            .try_inverse()
            .ok_or_else(|| invalid("linear image needs an invertible matrix"))?;
        let inv: Vec<f64> = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| inv[(i, j)])
            .collect();
        Ok(StarBody {
            n,
            label: format!("T({})", self.label),
            radial: Radial::Linear(Arc::new(self.clone()), inv),
        })
    }

    /// Minimum and maximum of `ρ` over the grid nodes.
    pub fn radial_range(&self, grid: &SphereGrid) -> (f64, f64) {
        self.radial_samples(grid)
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), v| {
                (lo.min(*v), hi.max(*v))
            })
    }
}

fn mat_vec(m: &[f64], x: &[f64], n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            m[i * n..(i + 1) * n]
                .iter()
                .zip(x)
                .map(|(a, b)| a * b)
                .sum()
        })
        .collect()
}

/// Sampled midpoint-convexity verdict.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvexityReport {
    pub is_convex: bool,
    /// Max over sampled boundary pairs of `‖(x + y)/2‖_K - 1`.
    pub worst_violation: f64,
    pub witness: [Vec<f64>; 2],
    pub pairs: usize,
    pub tolerance: f64,
}

fn boundary_pair(body: &StarBody, seed: u64, index: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let n = body.dim();
    let a = Direction::random(n, &mut rng);
    let b = Direction::random(n, &mut rng);
    let x = a
        .coords()
        .iter()
        .map(|v| v * body.radial(a.coords()))
        .collect();
    let y = b
        .coords()
        .iter()
        .map(|v| v * body.radial(b.coords()))
        .collect();
    (x, y)
}

/// Tests convexity on `num_pairs` random boundary pairs.
///
/// Pair `i` draws its two uniform directions from a ChaCha stream keyed by
/// `(seed, i)`, so the verdict does not depend on the worker count.
pub fn convexity_check(body: &StarBody, num_pairs: usize, tol: f64, seed: u64) -> ConvexityReport {
    let violation = |i: usize| {
        let (x, y) = boundary_pair(body, seed, i as u64);
        let mid: Vec<f64> = x.iter().zip(&y).map(|(a, b)| 0.5 * (a + b)).collect();
        let v = body.gauge(&mid) - 1.0;
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let (worst, index) = (0..num_pairs.max(1))
        .into_par_iter()
        .map(|i| (violation(i), i))
        .reduce(
            || (f64::NEG_INFINITY, usize::MAX),
            |a, b| {
                if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
                    b
                } else {
                    a
                }
            },
        );
    let (x, y) = boundary_pair(body, seed, index as u64);
    ConvexityReport {
        is_convex: worst <= tol,
        worst_violation: worst,
        witness: [x, y],
        pairs: num_pairs.max(1),
        tolerance: tol,
    }
}

/// `p` value accepting a number or the strings `"inf"` / `"infinity"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponent(pub f64);

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Exponent(v)),
            Raw::Text(t) if matches!(t.to_ascii_lowercase().as_str(), "inf" | "infinity") => {
                Ok(Exponent(f64::INFINITY))
            }
            Raw::Text(t) => Err(serde::de::Error::custom(format!("invalid exponent {t:?}"))),
        }
    }
}

/// Body shape in the JSON configuration schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ShapeSpec {
    Lp {
        p: Exponent,
    },
    Ellipsoid {
        semi_axes: Vec<f64>,
    },
    /// Radial samples at the nodes of a grid of the given resolution.
    Samples {
        resolution: usize,
        max_degree: usize,
        #[serde(default = "default_rule")]
        rule: Rule,
        values: Vec<f64>,
    },
}

fn default_rule() -> Rule {
    Rule::GaussJacobi
}

/// `{"kind": ..., parameters..., "scale": r}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BodySpec {
    #[serde(flatten)]
    pub shape: ShapeSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
}

impl BodySpec {
    pub fn build(&self, n: usize) -> Result<StarBody> {
        let body = match &self.shape {
            ShapeSpec::Lp { p } => lp_ball(n, p.0)?,
            ShapeSpec::Ellipsoid { semi_axes } => {
                if semi_axes.len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        got: semi_axes.len(),
                    });
                }
                ellipsoid(semi_axes)?
            }
            ShapeSpec::Samples {
                resolution,
                max_degree,
                rule,
                values,
            } => {
                let grid = GridSpec {
                    rule: *rule,
                    resolution: *resolution,
                }
                .build(n)?;
                if values.len() != grid.len() {
                    return Err(Error::DimensionMismatch {
                        expected: grid.len(),
                        got: values.len(),
                    });
                }
                from_radial_samples(values, &grid, *max_degree)?
            }
        };
        match self.scale {
            Some(r) => body.scaled(r),
            None => Ok(body),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::build_sphere_grid;

    #[test]
    fn lp_radial_values() {
        let b2 = lp_ball(4, 2.0).unwrap();
        assert!(
            (b2.radial(
                Direction::normalized(vec![1.0, 2.0, 3.0, 4.0])
                    .unwrap()
                    .coords()
            ) - 1.0)
                .abs()
                < 1e-15
        );
        let b1 = lp_ball(5, 1.0).unwrap();
        let d = Direction::normalized(vec![1.0; 5]).unwrap();
        assert!((b1.radial(d.coords()) - 1.0 / 5f64.sqrt()).abs() < 1e-15);
        let binf = lp_ball(3, f64::INFINITY).unwrap();
        assert_eq!(binf.radial(&[1.0, 0.0, 0.0]), 1.0);
        assert!(lp_ball(3, 0.0).is_err());
        assert!(lp_ball(3, -1.0).is_err());
    }

    #[test]
    fn ellipsoid_radial() {
        let e = ellipsoid(&[2.0, 1.0, 1.0]).unwrap();
        assert_eq!(e.radial(&[1.0, 0.0, 0.0]), 2.0);
        assert!(ellipsoid(&[1.0, 0.0]).is_err());
    }

    #[test]
    fn minkowski_functional_values() {
        let b1 = lp_ball(3, 1.0).unwrap();
        assert!((b1.minkowski_functional(&[1.0, 1.0, 1.0]).unwrap() - 3.0).abs() < 1e-15);
        assert!(b1.minkowski_functional(&[0.0; 3]).is_err());
        let b2 = lp_ball(3, 2.0).unwrap();
        assert!((b2.minkowski_functional(&[3.0, 4.0, 0.0]).unwrap() - 5.0).abs() < 1e-15);
    }

    #[test]
    fn linear_image_of_ball_is_ellipsoid() {
        let b = lp_ball(3, 2.0).unwrap();
        let t = b
            .linear_image(&[2.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.5])
            .unwrap();
        let e = ellipsoid(&[2.0, 1.0, 0.5]).unwrap();
        let d = Direction::normalized(vec![0.3, -0.4, 0.7]).unwrap();
        assert!((t.radial(d.coords()) - e.radial(d.coords())).abs() < 1e-14);
    }

    #[test]
    fn samples_round_trip_for_bandlimited_radial_function() {
        let g = build_sphere_grid(4, 12).unwrap();
        let vals = g.map(|x| 1.0 + 0.2 * x[0] * x[0] - 0.1 * x[1] * x[1] * x[2] * x[2]);
        let body = from_radial_samples(&vals, &g, 4).unwrap();
        for (i, x) in g.nodes().enumerate() {
            assert!((body.radial(x) / vals[i] - 1.0).abs() < 1e-6);
        }
        assert!(from_radial_samples(&vec![-1.0; g.len()], &g, 4).is_err());
    }

    #[test]
    fn nonconvex_quasi_ball_is_detected() {
        let b = lp_ball(3, 0.5).unwrap();
        let r = convexity_check(&b, 2000, 1e-9, 1);
        assert!(!r.is_convex);
        assert!(r.worst_violation > 0.1);
        let b1 = lp_ball(4, 1.0).unwrap();
        assert!(convexity_check(&b1, 2000, 1e-9, 1).is_convex);
    }

    #[test]
    fn body_spec_parses() {
        let s: BodySpec = serde_json::from_str(r#"{"kind":"lp","p":"inf","scale":2}"#).unwrap();
        let b = s.build(3).unwrap();
        assert_eq!(b.radial(&[1.0, 0.0, 0.0]), 2.0);
        let s: BodySpec =
            serde_json::from_str(r#"{"kind":"ellipsoid","semi_axes":[1,2]}"#).unwrap();
        assert!(s.build(3).is_err());
        assert!(serde_json::from_str::<BodySpec>(r#"{"kind":"cube"}"#).is_err());
    }
}
