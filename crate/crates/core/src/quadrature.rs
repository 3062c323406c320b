//! One-dimensional Gauss rules, adaptive interval integration and the
//! deterministic summation used by every reduction in the crate.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use statrs::function::gamma::ln_gamma;

use crate::error::{check_finite, invalid, Result};

/// Nodes and weights of a Gauss rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Applies the rule to `f` on `[a, b]` (weight function not included).
    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let terms: Vec<f64> = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .collect();
        half * pairwise_sum(&terms)
    }
}

/// Gauss rule for the weight `(1 - t^2)^alpha` on `[-1, 1]`, `alpha > -1`.
///
/// Nodes come from the symmetric Jacobi matrix of the Gegenbauer family and
/// are polished by Newton steps on the orthonormal polynomial; weights use the
/// Christoffel formula. Nodes and weights are exactly symmetric.
pub fn gauss_gegenbauer(count: usize, alpha: f64) -> Result<Arc<GaussRule>> {
    if count == 0 {
        return Err(invalid("Gauss rule needs at least one node"));
    }
    if !(alpha > -1.0) {
        return Err(invalid(format!(
            "Gegenbauer exponent {alpha} must exceed -1"
        )));
    }
    static CACHE: OnceLock<Mutex<HashMap<(usize, u64), Arc<GaussRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let key = (count, alpha.to_bits());
    if let Some(rule) = cache.lock().unwrap().get(&key) {
        return Ok(rule.clone());
    }
    let rule = Arc::new(build_gegenbauer(count, alpha));
    cache.lock().unwrap().insert(key, rule.clone());
    Ok(rule)
}

/// Gauss–Legendre rule with `count` nodes.
pub fn gauss_legendre(count: usize) -> Result<Arc<GaussRule>> {
    gauss_gegenbauer(count, 0.0)
}

// Off-diagonal entries of the orthonormal three-term recurrence.
fn recurrence_beta(k: usize, alpha: f64) -> f64 {
    let k = k as f64;
    let lambda = alpha + 0.5;
    if k == 1.0 && lambda.abs() < 1e-300 {
        return 0.5f64.sqrt();
    }
    (k * (k + 2.0 * lambda - 1.0) / (4.0 * (k + lambda) * (k + lambda - 1.0))).sqrt()
}

fn weight_mass(alpha: f64) -> f64 {
    // ∫_{-1}^{1} (1 - t^2)^alpha dt = sqrt(pi) Γ(alpha + 1) / Γ(alpha + 3/2)
    (0.5 * std::f64::consts::PI.ln() + ln_gamma(alpha + 1.0) - ln_gamma(alpha + 1.5)).exp()
}

// Orthonormal polynomials p_0..p_{count} at x; returns (sum p_k^2 for k < count, p_count, p_count').
fn orthonormal_at(x: f64, count: usize, betas: &[f64], p0: f64) -> (f64, f64, f64) {
    let mut prev = 0.0;
    let mut cur = p0;
    let mut dprev = 0.0;
    let mut dcur = 0.0;
    let mut sum_sq = 0.0;
    for k in 0..count {
        sum_sq += cur * cur;
        let b_next = betas[k + 1];
        let b_cur = if k == 0 { 0.0 } else { betas[k] };
        let next = (x * cur - b_cur * prev) / b_next;
        let dnext = (cur + x * dcur - b_cur * dprev) / b_next;
        prev = cur;
        cur = next;
        dprev = dcur;
        dcur = dnext;
    }
    (sum_sq, cur, dcur)
}

fn build_gegenbauer(count: usize, alpha: f64) -> GaussRule {
    let betas: Vec<f64> = (0..=count)
        .map(|k| {
            if k == 0 {
                0.0
            } else {
                recurrence_beta(k, alpha)
            }
        })
        .collect();
    let mass = weight_mass(alpha);
    let p0 = 1.0 / mass.sqrt();

    let mut jacobi = nalgebra::DMatrix::<f64>::zeros(count, count);
    for k in 1..count {
        jacobi[(k, k - 1)] = betas[k];
        jacobi[(k - 1, k)] = betas[k];
    }
    let eig = nalgebra::SymmetricEigen::new(jacobi);
    let mut nodes: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());

    for x in nodes.iter_mut() {
        for _ in 0..3 {
            let (_, p, dp) = orthonormal_at(*x, count, &betas, p0);
            if dp != 0.0 {
                let step = p / dp;
                *x -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
        }
    }
    let mut weights: Vec<f64> = nodes
        .iter()
        .map(|&x| 1.0 / orthonormal_at(x, count, &betas, p0).0)
        .collect();

    // Enforce exact symmetry.
    for i in 0..count / 2 {
        let j = count - 1 - i;
        let x = 0.5 * (nodes[j] - nodes[i]);
        nodes[i] = -x;
        nodes[j] = x;
        let w = 0.5 * (weights[i] + weights[j]);
        weights[i] = w;
        weights[j] = w;
    }
    if count % 2 == 1 {
        nodes[count / 2] = 0.0;
    }
    GaussRule { nodes, weights }
}

/// Pairwise (cascade) summation with a fixed split rule.
///
/// Splits land on even offsets, so entries `2i` and `2i + 1` are always added
/// first. Antipodal grids store `x, -x` adjacently, so odd integrands cancel
/// exactly. The result depends only on the input order, never on threading.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        2 => values[0] + values[1],
        len => {
            let mut mid = len / 2;
            mid += mid % 2;
            if mid >= len {
                mid = len - 2;
            }
            pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
        }
    }
}

/// Adaptive composite Gauss–Legendre integration on `[a, b]`.
#[derive(Debug, Clone, Copy)]
pub struct RadialRule {
    /// Nodes per panel.
    pub nodes: usize,
    /// Relative agreement required between one panel and its two halves.
    pub tolerance: f64,
    /// Maximum bisection depth.
    pub max_depth: u32,
}

impl Default for RadialRule {
    fn default() -> Self {
        Self {
            nodes: 64,
            tolerance: 1e-10,
            max_depth: 18,
        }
    }
}

impl RadialRule {
    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> Result<f64> {
        if a == b {
            return Ok(0.0);
        }
        let rule = gauss_legendre(self.nodes)?;
        let whole = rule.integrate(a, b, &f);
        let value = self.refine(&rule, a, b, whole, &f, 0);
        check_finite(value, "radial quadrature")
    }

    fn refine<F: Fn(f64) -> f64>(
        &self,
        rule: &GaussRule,
        a: f64,
        b: f64,
        whole: f64,
        f: &F,
        depth: u32,
    ) -> f64 {
        let mid = 0.5 * (a + b);
        let left = rule.integrate(a, mid, f);
        let right = rule.integrate(mid, b, f);
        let halves = left + right;
        let diff = (halves - whole).abs();
        if diff <= self.tolerance * halves.abs() || diff <= 1e-300 || depth >= self.max_depth {
            return halves;
        }
        self.refine(rule, a, mid, left, f, depth + 1)
            + self.refine(rule, mid, b, right, f, depth + 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rule_integrates_polynomials() {
        let rule = gauss_legendre(5).unwrap();
        // exact through degree 9
        let v = rule.integrate(-1.0, 1.0, |x| x.powi(8) + x.powi(3));
        assert!((v - 2.0 / 9.0).abs() < 1e-15);
        let total: f64 = rule.weights.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
    }

    #[test]
    fn gegenbauer_rule_matches_weight_moments() {
        // ∫ t^2 (1-t^2)^{1/2} dt = pi/8
        let rule = gauss_gegenbauer(4, 0.5).unwrap();
        let v: f64 = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(x, w)| w * x * x)
            .sum();
        assert!((v - std::f64::consts::PI / 8.0).abs() < 1e-15);
        let m0: f64 = rule.weights.iter().sum();
        assert!((m0 - std::f64::consts::FRAC_PI_2).abs() < 1e-14);
    }

    #[test]
    fn rules_are_symmetric() {
        for &(n, a) in &[(7usize, 0.0), (8, 1.0), (9, 0.5), (30, 1.5)] {
            let r = gauss_gegenbauer(n, a).unwrap();
            for i in 0..n {
                assert_eq!(r.nodes[i], -r.nodes[n - 1 - i]);
                assert_eq!(r.weights[i], r.weights[n - 1 - i]);
                assert!(r.weights[i] > 0.0);
            }
        }
    }

    #[test]
    fn high_order_rule_is_accurate() {
        let rule = gauss_legendre(64).unwrap();
        let v = rule.integrate(0.0, 3.0, |t| (-t * t / 2.0).exp());
        let exact =
            (std::f64::consts::PI / 2.0).sqrt() * statrs::function::erf::erf(3.0 / 2f64.sqrt());
        assert!((v - exact).abs() < 1e-12, "{v} {exact}");
    }

    #[test]
    fn pairwise_cancels_adjacent_pairs() {
        let v = [0.1, -0.1, 1e17, -1e17, 3.3, -3.3, 7.0];
        assert_eq!(pairwise_sum(&v[..6]), 0.0);
        assert_eq!(pairwise_sum(&v), 7.0);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }

    #[test]
    fn adaptive_rule_handles_endpoint_kink() {
        let rule = RadialRule::default();
        let v = rule.integrate(0.0, 1.0, |t| t.sqrt()).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-10, "{v}");
    }
}
