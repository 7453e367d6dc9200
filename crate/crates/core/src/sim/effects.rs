use std::fmt;

use crate::error::{Error, Result};

/// True group means `μ₀..μ_m` (control first) and common σ.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectConfiguration {
    means: Vec<f64>,
    sigma: f64,
}

impl EffectConfiguration {
    pub fn new(means: Vec<f64>, sigma: f64) -> Result<Self> {
        if means.len() < 2 {
            return Err(Error::Config(format!(
                "need a control and at least one active arm, got {} means",
                means.len()
            )));
        }
        if let Some(mu) = means.iter().find(|mu| !mu.is_finite()) {
            return Err(Error::Config(format!("group means must be finite, got {mu}")));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::Config(format!("sigma must be positive and finite, got {sigma}")));
        }
        Ok(Self { means, sigma })
    }

    pub fn with_sigma(self, sigma: f64) -> Result<Self> {
        Self::new(self.means, sigma)
    }

    /// Number of active arms.
    pub fn m(&self) -> usize {
        self.means.len() - 1
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

/// `μᵢ = i·δ/m`, σ = 1.
pub fn linear_effects(m: usize, delta: f64) -> Result<EffectConfiguration> {
    check(m, delta)?;
    EffectConfiguration::new((0..=m).map(|i| i as f64 * delta / m as f64).collect(), 1.0)
}

/// `μ₀ = 0`, `μᵢ = δ − (m−i)·η`, σ = 1.
pub fn clustered_effects(m: usize, delta: f64, eta: f64) -> Result<EffectConfiguration> {
    check(m, delta)?;
    if !(eta >= 0.0 && eta.is_finite()) {
        return Err(Error::Config(format!("eta must be finite and >= 0, got {eta}")));
    }
    let mut means = vec![0.0];
    means.extend((1..=m).map(|i| delta - (m - i) as f64 * eta));
    EffectConfiguration::new(means, 1.0)
}

fn check(m: usize, delta: f64) -> Result<()> {
    if m == 0 {
        return Err(Error::Config("m must be >= 1".into()));
    }
    if !delta.is_finite() {
        return Err(Error::Config(format!("delta must be finite, got {delta}")));
    }
    Ok(())
}

/// Family of effect configurations indexed by `δ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EffectShape {
    Linear,
    Clustered { eta: f64 },
}

impl EffectShape {
    pub fn configuration(&self, m: usize, delta: f64) -> Result<EffectConfiguration> {
        match *self {
            EffectShape::Linear => linear_effects(m, delta),
            EffectShape::Clustered { eta } => clustered_effects(m, delta, eta),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            EffectShape::Linear => "linear",
            EffectShape::Clustered { .. } => "clustered",
        }
    }

    pub fn eta(&self) -> Option<f64> {
        match *self {
            EffectShape::Linear => None,
            EffectShape::Clustered { eta } => Some(eta),
        }
    }
}

impl fmt::Display for EffectShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EffectShape::Linear => f.write_str("linear"),
            EffectShape::Clustered { eta } => write!(f, "clustered(eta={eta})"),
        }
    }
}
