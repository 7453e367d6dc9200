//! Gaussian quadrature rules.
//!
//! [`gauss_hermite_rule`] returns a rule for integrals against the standard
//! normal density: `∫ f(x) φ(x) dx ≈ Σ wᵢ f(xᵢ)`. The physicists' Hermite
//! nodes `tᵢ` and weights `hᵢ` (weight function `exp(-t²)`) come from the
//! Jacobi-matrix eigenvalues, polished by Newton iteration on the orthonormal
//! three-term recurrence, and are then mapped with `xᵢ = √2·tᵢ`, `wᵢ = hᵢ/√π`, so the weights sum to one.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Order used for the Dunnett integral unless a caller asks otherwise.
pub const DEFAULT_ORDER: usize = 64;

pub const MAX_ORDER: usize = 256;

/// Nodes and weights of a quadrature rule against the standard normal density.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Abscissae in strictly increasing order.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Approximates `E[f(X)]` for `X ~ N(0, 1)`.
    #[inline]
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Shared rule of [`DEFAULT_ORDER`], built once per process.
    pub fn standard() -> &'static QuadratureRule {
        static RULE: OnceLock<QuadratureRule> = OnceLock::new();
        RULE.get_or_init(|| gauss_hermite_rule(DEFAULT_ORDER).expect("default order is valid"))
    }
}

/// Gauss–Hermite rule of the given order for the standard normal weight.
pub fn gauss_hermite_rule(order: usize) -> Result<QuadratureRule> {
    if !(1..=MAX_ORDER).contains(&order) {
        return Err(Error::Config(format!(
            "quadrature order must be in 1..={MAX_ORDER}, got {order}"
        )));
    }
    let n = order;
    // Eigenvalues of the Jacobi matrix give the roots to ~1e-14; Newton on
    // the orthonormal recurrence then polishes them and yields weights with
    // full relative precision even where they are ~1e-200.
    let off: Vec<f64> = (1..n).map(|k| (k as f64 / 2.0).sqrt()).collect();
    let mut t = symmetric_tridiagonal_eigenvalues(vec![0.0; n], off)?;
    t.sort_by(|a, b| b.total_cmp(a));
    let pim4 = PI.powf(-0.25);
    let mut h = vec![0.0; n];
    for (i, root) in t.iter_mut().enumerate() {
        let mut z = *root;
        let mut pp = 0.0;
        for _ in 0..8 {
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
            }
            pp = (2.0 * n as f64).sqrt() * p2;
            let step = p1 / pp;
            z -= step;
            if step.abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        *root = z;
        h[i] = 2.0 / (pp * pp);
    }
    // Enforce exact symmetry.
    for i in 0..n / 2 {
        let z = 0.5 * (t[i] - t[n - 1 - i]);
        let w = 0.5 * (h[i] + h[n - 1 - i]);
        t[i] = z;
        t[n - 1 - i] = -z;
        h[i] = w;
        h[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        t[n / 2] = 0.0;
    }

    // t is decreasing; reverse while mapping to the normal weight.
    let nodes: Vec<f64> = t.iter().rev().map(|&x| x * std::f64::consts::SQRT_2).collect();
    let weights: Vec<f64> = h.iter().rev().map(|&w| w / PI.sqrt()).collect();
    Ok(QuadratureRule { nodes, weights })
}

/// Eigenvalues of a symmetric tridiagonal matrix by the implicit QL method.
fn symmetric_tridiagonal_eigenvalues(mut d: Vec<f64>, off: Vec<f64>) -> Result<Vec<f64>> {
    let n = d.len();
    let mut e = off;
    e.push(0.0);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::Config("tridiagonal eigenvalue iteration did not converge".into()));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(d)
}

/// Gauss–Legendre nodes and weights on [-1, 1].
pub(crate) fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let n = order;
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut pp;
        loop {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = ((2.0 * jf - 1.0) * z * p2 - (jf - 1.0) * p3) / jf;
            }
            pp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Composite Gauss–Legendre integral of `f` over `[a, b]` with `panels`
/// equal sub-intervals.
pub(crate) fn integrate_interval<F: FnMut(f64) -> f64>(
    a: f64,
    b: f64,
    panels: usize,
    order: usize,
    mut f: F,
) -> f64 {
    if b <= a {
        return 0.0;
    }
    let (x, w) = gauss_legendre(order);
    let width = (b - a) / panels as f64;
    let mut total = 0.0;
    for k in 0..panels {
        let lo = a + k as f64 * width;
        let mid = lo + 0.5 * width;
        let half = 0.5 * width;
        let mut s = 0.0;
        for (xi, wi) in x.iter().zip(&w) {
            s += wi * f(mid + half * xi);
        }
        total += half * s;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::normal;
    use crate::stats::RandomSource;

    fn double_factorial_moment(k: u32) -> f64 {
        // E[X^k] for standard normal
        if k % 2 == 1 {
            return 0.0;
        }
        (1..k).step_by(2).map(|j| j as f64).product()
    }

    #[test]
    fn order_bounds() {
        assert!(gauss_hermite_rule(0).is_err());
        assert!(gauss_hermite_rule(257).is_err());
        assert!(gauss_hermite_rule(1).is_ok());
        assert!(gauss_hermite_rule(256).is_ok());
    }

    #[test]
    fn structural_invariants() {
        for order in [1, 2, 3, 7, 16, 32, 64, 128, 256] {
            let rule = gauss_hermite_rule(order).unwrap();
            assert_eq!(rule.order(), order);
            assert_eq!(rule.weights().len(), order);
            assert!(rule.nodes().windows(2).all(|w| w[0] < w[1]), "order {order}");
            assert!(rule.weights().iter().all(|&w| w > 0.0), "order {order}");
            assert!((rule.integrate(|_| 1.0) - 1.0).abs() < 1e-12, "order {order}");
        }
    }

    #[test]
    fn low_moments_at_order_32() {
        let rule = gauss_hermite_rule(32).unwrap();
        assert!(rule.integrate(|x| x).abs() < 1e-12);
        assert!((rule.integrate(|x| x * x) - 1.0).abs() < 1e-10);
        assert!((rule.integrate(normal::pdf) - 1.0 / (2.0 * PI.sqrt())).abs() < 1e-10);
    }

    #[test]
    fn polynomial_exactness_at_order_16() {
        let rule = gauss_hermite_rule(16).unwrap();
        for k in 0..=9u32 {
            let got = rule.integrate(|x| x.powi(k as i32));
            assert!((got - double_factorial_moment(k)).abs() < 1e-9, "degree {k}: {got}");
        }
    }

    #[test]
    fn pdf_integrates_to_one() {
        // ∫ φ(x) dx = E[φ(X)/φ(X)] = 1, written against the weight.
        let rule = QuadratureRule::standard();
        let got = rule.integrate(|x| normal::pdf(x) / normal::pdf(x));
        assert!((got - 1.0).abs() < 1e-10);
    }

    #[test]
    fn cube_of_cdf_matches_monte_carlo() {
        // E[Φ(X)^3] = 1/4 exactly (Φ(X) is uniform); compare both to MC.
        let rule = gauss_hermite_rule(32).unwrap();
        let quad = rule.integrate(|x| normal::cdf(x).powi(3));
        let draws = 10_000_000u64;
        let mut rng = RandomSource::new(7, 0);
        let (mut sum, mut sumsq) = (0.0, 0.0);
        for _ in 0..draws {
            let v = normal::cdf(rng.draw_std_normal()).powi(3);
            sum += v;
            sumsq += v * v;
        }
        let mean = sum / draws as f64;
        let se = ((sumsq / draws as f64 - mean * mean) / draws as f64).sqrt();
        assert!((quad - mean).abs() < 3.0 * se, "quad {quad} mc {mean} se {se}");
        assert!((quad - 0.25).abs() < 1e-9);
    }

    #[test]
    fn legendre_panels_integrate_gaussian() {
        let v = integrate_interval(-12.0, 12.0, 24, 16, normal::pdf);
        assert!((v - 1.0).abs() < 1e-13);
        let v = integrate_interval(0.0, 1.0, 1, 8, |x| x.powi(15));
        assert!((v - 1.0 / 16.0).abs() < 1e-14);
    }
}
