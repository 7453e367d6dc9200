//! Dunnett many-to-one comparisons with a known common variance.
//!
//! With equal group sizes `n`, the standardized differences
//! `Zᵢ = (x̄ᵢ − x̄₀)/√(2σ²/n)` share the control mean and are equicorrelated
//! with correlation ½. Writing `Zᵢ = (Yᵢ − Y₀)/√2` with independent standard
//! normals gives the distribution of the maximum over `k` arms as
//!
//! ```text
//! P(max Zᵢ ≤ z) = ∫ Φ(√2·z + x)^k φ(x) dx
//! ```
//!
//! which is evaluated with Gauss–Hermite quadrature for every `k`.

use crate::error::{Error, Result};
use crate::stats::normal;
use crate::stats::QuadratureRule;

/// Largest number of arms accepted in a single maximum.
pub const MAX_ARMS: usize = 64;

/// Sample mean and size of one arm. Label 0 is the control.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupSummary {
    pub label: usize,
    pub mean: f64,
    pub size: usize,
}

impl GroupSummary {
    pub fn new(label: usize, mean: f64, size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::Input(format!("group {label} has size 0")));
        }
        if !mean.is_finite() {
            return Err(Error::Input(format!("group {label} has non-finite mean {mean}")));
        }
        Ok(Self { label, mean, size })
    }
}

/// Standardized treatment-minus-control differences for a set of arms.
#[derive(Debug, Clone, PartialEq)]
pub struct ZStatistics {
    arms: Vec<usize>,
    values: Vec<f64>,
    group_size: usize,
    sigma: f64,
}

impl ZStatistics {
    /// `arms` are 1-based arm labels in strictly increasing order, one per value.
    pub fn new(arms: Vec<usize>, values: Vec<f64>, group_size: usize, sigma: f64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Input("at least one active arm is required".into()));
        }
        if arms.len() != values.len() {
            return Err(Error::Input(format!(
                "{} arm labels for {} statistics",
                arms.len(),
                values.len()
            )));
        }
        if arms.iter().any(|&a| a == 0 || a > MAX_ARMS) || arms.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Input(format!(
                "arm labels must be strictly increasing within 1..={MAX_ARMS}: {arms:?}"
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Input(format!("non-finite z statistic {v}")));
        }
        if group_size == 0 || !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::Input(format!(
                "group size {group_size} and sigma {sigma} must be positive"
            )));
        }
        Ok(Self { arms, values, group_size, sigma })
    }

    /// Statistics for arms `1..=values.len()`.
    pub fn for_all_arms(values: Vec<f64>, group_size: usize, sigma: f64) -> Result<Self> {
        let arms = (1..=values.len()).collect();
        Self::new(arms, values, group_size, sigma)
    }

    pub fn arms(&self) -> &[usize] {
        &self.arms
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn group_size(&self) -> usize {
        self.group_size
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Statistic of a given arm label, if present.
    pub fn get(&self, arm: usize) -> Option<f64> {
        self.arms.iter().position(|&a| a == arm).map(|i| self.values[i])
    }
}

/// Standardizes active-arm means against the control (label 0).
pub fn z_statistics(groups: &[GroupSummary], sigma: f64) -> Result<ZStatistics> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::Input(format!("sigma must be positive, got {sigma}")));
    }
    let mut controls = groups.iter().filter(|g| g.label == 0);
    let control = controls
        .next()
        .ok_or_else(|| Error::Input("no control group (label 0)".into()))?;
    if controls.next().is_some() {
        return Err(Error::Input("more than one control group".into()));
    }
    let n = control.size;
    if let Some(g) = groups.iter().find(|g| g.size != n) {
        return Err(Error::Input(format!(
            "group {} has size {} but the control has {n}",
            g.label, g.size
        )));
    }
    let mut active: Vec<&GroupSummary> = groups.iter().filter(|g| g.label != 0).collect();
    active.sort_by_key(|g| g.label);
    let scale = (2.0 * sigma * sigma / n as f64).sqrt();
    let arms = active.iter().map(|g| g.label).collect();
    let values = active.iter().map(|g| (g.mean - control.mean) / scale).collect();
    ZStatistics::new(arms, values, n, sigma)
}

fn check_arms(k: usize) -> Result<()> {
    if !(1..=MAX_ARMS).contains(&k) {
        return Err(Error::Config(format!("number of arms must be in 1..={MAX_ARMS}, got {k}")));
    }
    Ok(())
}

/// `P(max of k equicorrelated Z ≤ z)`.
pub fn dunnett_max_cdf(z: f64, k: usize, rule: &QuadratureRule) -> Result<f64> {
    check_arms(k)?;
    if !z.is_finite() {
        return Err(Error::Domain(format!("z must be finite, got {z}")));
    }
    let shift = std::f64::consts::SQRT_2 * z;
    let k = k as i32;
    Ok(rule.integrate(|x| normal::cdf(shift + x).powi(k)))
}

/// `P(max of k equicorrelated Z > zmax)` under the global null.
pub fn dunnett_pvalue(zmax: f64, k: usize, rule: &QuadratureRule) -> Result<f64> {
    check_arms(k)?;
    if !zmax.is_finite() {
        return Err(Error::Domain(format!("z must be finite, got {zmax}")));
    }
    Ok(upper_tail(zmax, k, rule))
}

/// Unchecked p-value. Integrates `1 − (1 − Q)^k` with `Q` the upper normal
/// tail so that small p-values keep their relative precision.
#[inline]
pub(crate) fn upper_tail(zmax: f64, k: usize, rule: &QuadratureRule) -> f64 {
    let shift = std::f64::consts::SQRT_2 * zmax;
    let p = if k == 1 {
        rule.integrate(|x| normal::sf(shift + x))
    } else {
        let kf = k as f64;
        rule.integrate(|x| -libm::expm1(kf * libm::log1p(-normal::sf(shift + x))))
    };
    p.clamp(0.0, 1.0)
}

/// Exact one-sided power of a single treatment-versus-control z-test.
pub fn single_arm_power(delta: f64, n: usize, sigma: f64, alpha: f64) -> Result<f64> {
    if n == 0 || !(sigma > 0.0 && sigma.is_finite()) || !delta.is_finite() {
        return Err(Error::Input(format!("invalid n = {n}, sigma = {sigma}, delta = {delta}")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("alpha must be in (0, 1), got {alpha}")));
    }
    let shift = delta * (n as f64 / 2.0).sqrt() / sigma;
    Ok(normal::cdf(shift + normal::quantile(alpha)))
}
