//! Inverse normal combination of independent stage-wise p-values and the
//! level of the resulting two-stage test.

use super::design::{check_boundaries, Weights};
use crate::error::{Error, Result};
use crate::stats::normal;
use crate::stats::quadrature::integrate_interval;

/// Stage-wise p-values are clamped into `[P_CLAMP, 1 − P_CLAMP]`.
pub const P_CLAMP: f64 = 1e-15;

const PANELS: usize = 32;
const NODES: usize = 16;
const TAIL: f64 = 12.0;

/// A combined p-value, flagged when an input had to be clamped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Combination {
    pub p: f64,
    pub clamped: bool,
}

/// `1 − Φ(w1·Φ⁻¹(1−p1) + w2·Φ⁻¹(1−p2))`.
pub fn inverse_normal_combine(p1: f64, p2: f64, w: Weights) -> Result<Combination> {
    for p in [p1, p2] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain(format!("p-value {p} outside [0, 1]")));
        }
    }
    let c1 = p1.clamp(P_CLAMP, 1.0 - P_CLAMP);
    let c2 = p2.clamp(P_CLAMP, 1.0 - P_CLAMP);
    // Φ⁻¹(1−p) = −Φ⁻¹(p) without forming 1 − p.
    let z = -w.w1() * normal::quantile(c1) - w.w2() * normal::quantile(c2);
    Ok(Combination { p: normal::sf(z), clamped: c1 != p1 || c2 != p2 })
}

/// Probability under the null that the two-stage test with boundaries
/// `(alpha0, alpha1)` and final critical value `c` rejects:
/// `α₁ + P(α₁ < p1 ≤ α₀, C(p1, p2) ≤ c)` for independent uniform `p1`, `p2`.
///
/// The inner integral over `p2` is closed form; the outer one runs over
/// `u = Φ⁻¹(1−p1)` with composite Gauss–Legendre panels refined around the
/// point where the inner probability switches from 0 to 1.
pub fn combination_type1_error(alpha0: f64, alpha1: f64, c: f64, w: Weights) -> Result<f64> {
    check_boundaries(alpha0, alpha1).map_err(|e| Error::Input(e.to_string()))?;
    if !(0.0..=1.0).contains(&c) {
        return Err(Error::Input(format!("critical value c must lie in [0, 1], got {c}")));
    }
    let mass = alpha0 - alpha1;
    if c == 0.0 || mass == 0.0 {
        return Ok(alpha1);
    }
    if c == 1.0 {
        return Ok(alpha0);
    }
    let (w1, w2) = (w.w1(), w.w2());
    if w1 == 0.0 {
        return Ok(alpha1 + c * mass);
    }
    let q = -normal::quantile(c);
    let lo = if alpha0 == 1.0 { -TAIL } else { (-normal::quantile(alpha0)).max(-TAIL) };
    let hi = if alpha1 == 0.0 { TAIL } else { (-normal::quantile(alpha1)).min(TAIL) };
    if lo >= hi {
        return Ok(alpha1);
    }
    if w2 == 0.0 {
        // Stage two carries no weight: reject iff u ≥ q.
        let a = lo.max(q);
        return Ok(alpha1 + if a < hi { normal::cdf(hi) - normal::cdf(a) } else { 0.0 });
    }
    let centre = q / w1;
    let spread = 8.0 * w2 / w1;
    let mut cuts = vec![lo];
    for b in [centre - spread, centre + spread] {
        if b > lo && b < hi {
            cuts.push(b);
        }
    }
    cuts.push(hi);
    let integrand = |u: f64| normal::pdf(u) * normal::sf((q - w1 * u) / w2);
    let outer: f64 = cuts
        .windows(2)
        .map(|ab| integrate_interval(ab[0], ab[1], PANELS, NODES, integrand))
        .sum();
    Ok(alpha1 + outer.clamp(0.0, mass))
}
