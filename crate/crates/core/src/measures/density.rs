use std::sync::Arc;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::bodies::{lp_norm, Exponent, StarBody};
use crate::error::{invalid, Error, Result};
use crate::quadrature::RadialRule;
use crate::sphere::{norm, SphereGrid};

#[derive(Debug, Clone)]
enum Factor {
    Gaussian,
    LpPower { p: f64, s: f64 },
    Gauge { body: Arc<StarBody>, s: f64 },
}

/// Even nonnegative weight on `R^n`: a product of Gaussian and norm-power factors.
///
/// Along a ray every density factors as `f(tθ) = c(θ) t^s e^{-g t²/2}`, which
/// drives the choice of radial quadrature.
#[derive(Debug, Clone)]
pub struct Density {
    factors: Vec<Factor>,
    label: String,
}

/// Ray decomposition `f(tθ) = c t^s e^{-g t²/2}`.
#[derive(Debug, Clone, Copy)]
pub struct RayProfile {
    pub c: f64,
    pub s: f64,
    pub g: f64,
}

impl Density {
    /// `f ≡ 1`.
    pub fn lebesgue() -> Self {
        Self {
            factors: Vec::new(),
            label: "lebesgue".into(),
        }
    }

    /// `e^{-|x|²/2}`.
    pub fn gaussian() -> Self {
        Self {
            factors: vec![Factor::Gaussian],
            label: "gaussian".into(),
        }
    }

    /// `‖x‖_p^s` with `s > -1`.
    pub fn lp_power(p: f64, s: f64) -> Result<Self> {
        if !(p > 0.0) {
            return Err(invalid(format!("lp_power needs p > 0, got {p}")));
        }
        if !(s > -1.0) || !s.is_finite() {
            return Err(invalid(format!("lp_power needs s > -1, got {s}")));
        }
        let p_label = if p.is_infinite() {
            "inf".to_string()
        } else {
            format!("{p}")
        };
        Ok(Self {
            factors: vec![Factor::LpPower { p, s }],
            label: format!("lp_power(p={p_label},s={s})"),
        })
    }

    /// `‖x‖_M^s` for a star body `M`.
    pub fn gauge_power(body: &StarBody, s: f64) -> Result<Self> {
        if !(s > -1.0) || !s.is_finite() {
            return Err(invalid(format!("gauge power needs s > -1, got {s}")));
        }
        Ok(Self {
            label: format!("gauge({},s={s})", body.label()),
            factors: vec![Factor::Gauge {
                body: Arc::new(body.clone()),
                s,
            }],
        })
    }

    /// Pointwise product.
    pub fn product(parts: &[Density]) -> Self {
        let factors: Vec<Factor> = parts.iter().flat_map(|d| d.factors.clone()).collect();
        let label = if factors.is_empty() {
            "lebesgue".to_string()
        } else {
            parts
                .iter()
                .filter(|d| !d.factors.is_empty())
                .map(|d| d.label.clone())
                .collect::<Vec<_>>()
                .join("*")
        };
        Self { factors, label }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_lebesgue(&self) -> bool {
        self.factors.is_empty()
    }

    /// Degree `s` with `f(rx) = r^s f(x)`, or `None` when a Gaussian factor is present.
    pub fn homogeneity(&self) -> Option<f64> {
        self.factors.iter().try_fold(0.0, |acc, f| match f {
            Factor::Gaussian => None,
            Factor::LpPower { s, .. } | Factor::Gauge { s, .. } => Some(acc + s),
        })
    }

    /// No factor vanishes away from the origin, so the density is positive on `R^n \ {0}`.
    pub fn is_strictly_positive(&self) -> bool {
        true
    }

    /// Smooth on `R^n \ {0}`.
    pub fn is_smooth(&self) -> bool {
        self.factors.iter().all(|f| match f {
            Factor::Gaussian => true,
            Factor::LpPower { p, .. } => *p == 2.0,
            Factor::Gauge { .. } => false,
        })
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.factors
            .iter()
            .map(|f| match f {
                Factor::Gaussian => (-0.5 * x.iter().map(|v| v * v).sum::<f64>()).exp(),
                Factor::LpPower { p, s } => pow_or_one(lp_norm(x, *p), *s),
                Factor::Gauge { body, s } => pow_or_one(body_gauge(body, x), *s),
            })
            .product()
    }

    pub fn ray(&self, theta: &[f64]) -> RayProfile {
        let mut r = RayProfile {
            c: 1.0,
            s: 0.0,
            g: 0.0,
        };
        for f in &self.factors {
            match f {
                Factor::Gaussian => r.g += 1.0,
                Factor::LpPower { p, s } => {
                    r.c *= lp_norm(theta, *p).powf(*s);
                    r.s += s;
                }
                Factor::Gauge { body, s } => {
                    r.c *= body.radial(theta).powf(-s);
                    r.s += s;
                }
            }
        }
        r
    }

    /// `∫_0^ρ t^k f(tθ) dt` for unit `θ`.
    pub fn radial_integral(
        &self,
        theta: &[f64],
        k: f64,
        rho: f64,
        rule: &RadialRule,
    ) -> Result<f64> {
        let ray = self.ray(theta);
        Ok(ray.c * unit_radial(k + ray.s + 1.0, ray.g, rho, rule)?)
    }

    /// `∫_0^{ρ_i} t^k f(tθ_i) dt` at every node of `grid`, with `rhos[i]` per node.
    ///
    /// The exponent and Gaussian rate of the ray profile do not depend on `θ`,
    /// so the integral is `c(θ) F(ρ)` for a single function `F`, which is
    /// interpolated once over the range of `rhos`.
    pub fn radial_integrals(
        &self,
        grid: &SphereGrid,
        k: f64,
        rhos: &[f64],
        rule: &RadialRule,
    ) -> Result<Vec<f64>> {
        if rhos.len() != grid.len() {
            return Err(invalid("one radius per grid node"));
        }
        if grid.is_empty() {
            return Ok(Vec::new());
        }
        let ray = self.ray(grid.node(0));
        let (lo, hi) = rhos
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
        let curve = RadialCurve::new(k + ray.s + 1.0, ray.g, lo, hi, rule)?;
        let cs = grid.map(|x| self.ray(x).c);
        cs.iter()
            .zip(rhos)
            .map(|(c, &r)| curve.eval(r, rule).map(|v| c * v))
            .collect()
    }

    /// Solves `∫_0^ρ t^k f(tθ) dt = target` for `ρ` (monotone in `ρ`).
    pub fn solve_radius(
        &self,
        theta: &[f64],
        k: f64,
        target: f64,
        rule: &RadialRule,
    ) -> Result<f64> {
        if !(target > 0.0) || !target.is_finite() {
            return Err(Error::Bracket(format!("target {target} must be positive")));
        }
        let ray = self.ray(theta);
        let q = k + ray.s + 1.0;
        if !(q > 0.0) || !(ray.c > 0.0) {
            return Err(Error::ZeroDensity {
                theta: theta.to_vec(),
                t: 0.0,
            });
        }
        // Lebesgue-like lower bound on ρ since e^{-g t²/2} ≤ 1.
        let lo0 = (q * target / ray.c).powf(1.0 / q);
        if ray.g == 0.0 {
            return Ok(lo0);
        }
        let sup = ray.c
            * ((q / 2.0 - 1.0) * std::f64::consts::LN_2 + ln_gamma(q / 2.0)
                - (q / 2.0) * ray.g.ln())
            .exp();
        if target >= sup * (1.0 - 1e-12) {
            return Err(Error::Bracket(format!(
                "target {target:.6e} exceeds the total ray mass {sup:.6e}"
            )));
        }
        let value = |r: f64| self.radial_integral(theta, k, r, rule).map(|v| v - target);
        let (mut lo, mut hi) = (lo0, 2.0 * lo0);
        while value(hi)? < 0.0 {
            lo = hi;
            hi *= 2.0;
            if hi > 1e12 {
                return Err(Error::Bracket("upper bracket diverged".into()));
            }
        }
        let deriv = |r: f64| ray.c * r.powf(q - 1.0) * (-0.5 * ray.g * r * r).exp();
        let mut x = 0.5 * (lo + hi);
        for _ in 0..200 {
            let fx = value(x)?;
            if fx == 0.0 {
                return Ok(x);
            }
            if fx < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let d = deriv(x);
            let newton = x - fx / d;
            let next = if d > 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if (next - x).abs() <= 1e-14 * x || hi - lo <= 1e-15 * hi {
                return Ok(next);
            }
            x = next;
        }
        Ok(x)
    }
}

/// Ray integral `F(ρ) = ∫_0^ρ t^{k+s} e^{-g t²/2} dt` shared by every direction,
/// so that `∫_0^ρ t^k f(tθ) dt = c(θ) F(ρ)`.
#[derive(Debug, Clone)]
pub(crate) struct RadialProfile {
    curve: RadialCurve,
    rule: RadialRule,
}

impl Density {
    /// Profile interpolated on `[lo, hi]`; values outside fall back to quadrature.
    pub(crate) fn radial_profile(&self, k: f64, lo: f64, hi: f64) -> Result<RadialProfile> {
        let (mut s, mut g) = (0.0, 0.0);
        for f in &self.factors {
            match f {
                Factor::Gaussian => g += 1.0,
                Factor::LpPower { s: e, .. } | Factor::Gauge { s: e, .. } => s += e,
            }
        }
        let rule = RadialRule::default();
        Ok(RadialProfile {
            curve: RadialCurve::new(k + s + 1.0, g, lo, hi, &rule)?,
            rule,
        })
    }
}

impl RadialProfile {
    pub(crate) fn eval(&self, rho: f64) -> Result<f64> {
        self.curve.eval(rho, &self.rule)
    }

    /// `ρ` with `F(ρ) = target`, by safeguarded Newton from `guess`.
    pub(crate) fn solve(&self, target: f64, guess: f64) -> Result<f64> {
        let (q, g) = (self.curve.q, self.curve.g);
        if !(target > 0.0) || !target.is_finite() {
            return Err(Error::Bracket(format!("target {target} must be positive")));
        }
        if g == 0.0 {
            return Ok((q * target).powf(1.0 / q));
        }
        let (mut lo, mut hi) = (0.0, f64::INFINITY);
        let mut x = guess;
        for _ in 0..200 {
            let fx = self.eval(x)? - target;
            if fx == 0.0 {
                return Ok(x);
            }
            if fx < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let d = x.powf(q - 1.0) * (-0.5 * g * x * x).exp();
            let newton = x - fx / d;
            let next = if d > 0.0 && newton > lo && newton < hi {
                newton
            } else if hi.is_finite() {
                0.5 * (lo + hi)
            } else {
                2.0 * x
            };
            if (next - x).abs() <= 1e-15 * x || (hi.is_finite() && hi - lo <= 1e-15 * hi) {
                return Ok(next);
            }
            if next > 1e12 {
                return Err(Error::Bracket("upper bracket diverged".into()));
            }
            x = next;
        }
        Ok(x)
    }
}

/// `∫_0^ρ t^{q-1} e^{-g t²/2} dt`.
fn unit_radial(q: f64, g: f64, rho: f64, rule: &RadialRule) -> Result<f64> {
    if !(q > 0.0) {
        return Err(invalid(format!(
            "radial integral diverges at the origin: exponent {}",
            q - 1.0
        )));
    }
    if !(rho >= 0.0) || !rho.is_finite() {
        return Err(Error::NonFinite(format!("radial bound {rho}")));
    }
    let base = rho.powf(q) / q;
    if g == 0.0 || rho == 0.0 {
        return crate::error::check_finite(base, "radial integral");
    }
    let v = if (q - 1.0).fract() == 0.0 {
        let e = (q - 1.0) as i32;
        rule.integrate(0.0, rho, |t| t.powi(e) * (-0.5 * g * t * t).exp())?
    } else {
        // u = (t/ρ)^q removes the endpoint singularity
        let scale = g * rho * rho;
        base * rule.integrate(0.0, 1.0, |u| (-0.5 * scale * u.powf(2.0 / q)).exp())?
    };
    crate::error::check_finite(v, "radial integral")
}

/// Chebyshev interpolant of `ρ ↦ ∫_0^ρ t^{q-1} e^{-g t²/2} dt` on `[lo, hi]`,
/// accepted once it matches the radial rule to 1e-13 at interleaved checks.
#[derive(Debug, Clone)]
struct RadialCurve {
    q: f64,
    g: f64,
    lo: f64,
    hi: f64,
    coeffs: Option<Vec<f64>>,
}

impl RadialCurve {
    fn new(q: f64, g: f64, lo: f64, hi: f64, rule: &RadialRule) -> Result<Self> {
        let mut curve = Self {
            q,
            g,
            lo,
            hi,
            coeffs: None,
        };
        if g == 0.0 || !(hi > lo) {
            return Ok(curve);
        }
        let mut count = 16;
        while count <= 256 {
            let samples = (0..count)
                .map(|j| unit_radial(q, g, curve.point(chebyshev_node(j, count)), rule))
                .collect::<Result<Vec<_>>>()?;
            let coeffs = chebyshev_coefficients(&samples);
            let scale = samples.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let mut ok = true;
            for j in 0..count {
                let x = (std::f64::consts::PI * (j as f64 + 1.0) / count as f64).cos();
                let exact = unit_radial(q, g, curve.point(x), rule)?;
                if (clenshaw(&coeffs, x) - exact).abs() > 1e-13 * scale {
                    ok = false;
                    break;
                }
            }
            if ok {
                curve.coeffs = Some(coeffs);
                return Ok(curve);
            }
            count *= 2;
        }
        Ok(curve)
    }

    fn point(&self, x: f64) -> f64 {
        0.5 * (self.hi + self.lo) + 0.5 * (self.hi - self.lo) * x
    }

    fn eval(&self, rho: f64, rule: &RadialRule) -> Result<f64> {
        match &self.coeffs {
            Some(c) if rho >= self.lo && rho <= self.hi => {
                let x = ((2.0 * rho - self.hi - self.lo) / (self.hi - self.lo)).clamp(-1.0, 1.0);
                crate::error::check_finite(clenshaw(c, x), "radial integral")
            }
            _ => unit_radial(self.q, self.g, rho, rule),
        }
    }
}

fn chebyshev_node(j: usize, count: usize) -> f64 {
    (std::f64::consts::PI * (j as f64 + 0.5) / count as f64).cos()
}

fn chebyshev_coefficients(samples: &[f64]) -> Vec<f64> {
    let count = samples.len();
    (0..count)
        .map(|k| {
            let scale = if k == 0 { 1.0 } else { 2.0 } / count as f64;
            scale
                * samples
                    .iter()
                    .enumerate()
                    .map(|(j, v)| {
                        v * (std::f64::consts::PI * k as f64 * (j as f64 + 0.5) / count as f64)
                            .cos()
                    })
                    .sum::<f64>()
        })
        .collect()
}

fn clenshaw(coeffs: &[f64], x: f64) -> f64 {
    let (mut b1, mut b2) = (0.0, 0.0);
    for &c in coeffs.iter().skip(1).rev() {
        let b0 = 2.0 * x * b1 - b2 + c;
        b2 = b1;
        b1 = b0;
    }
    x * b1 - b2 + coeffs[0]
}

fn pow_or_one(base: f64, s: f64) -> f64 {
    if s == 0.0 {
        1.0
    } else {
        base.powf(s)
    }
}

fn body_gauge(body: &StarBody, x: &[f64]) -> f64 {
    let r = norm(x);
    if r == 0.0 {
        0.0
    } else {
        body.minkowski_functional(x).unwrap_or(0.0)
    }
}

/// One factor of the JSON density schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FactorSpec {
    Lebesgue,
    Gaussian,
    LpPower { p: Exponent, s: f64 },
}

/// A single factor object or an array of factors (their product).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DensitySpec {
    Single(FactorSpec),
    Product(Vec<FactorSpec>),
}

impl DensitySpec {
    pub fn build(&self) -> Result<Density> {
        let one = |f: &FactorSpec| match f {
            FactorSpec::Lebesgue => Ok(Density::lebesgue()),
            FactorSpec::Gaussian => Ok(Density::gaussian()),
            FactorSpec::LpPower { p, s } => Density::lp_power(p.0, *s),
        };
        match self {
            DensitySpec::Single(f) => one(f),
            DensitySpec::Product(fs) => Ok(Density::product(
                &fs.iter().map(one).collect::<Result<Vec<_>>>()?,
            )),
        }
    }
}
