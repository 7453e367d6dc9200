use std::fmt;

use crate::closed_testing::MAX_FAMILY;
use crate::error::{Error, Result};

/// Interim rule deciding which active arms continue to stage two.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SelectionRule {
    /// The `s` arms with the largest stage-1 z statistics.
    FixedCount { s: usize },
    /// Every arm whose z statistic is within `epsilon` of the largest.
    Epsilon { epsilon: f64 },
}

impl SelectionRule {
    pub fn validate(&self, m: usize) -> Result<()> {
        match *self {
            SelectionRule::FixedCount { s } if s == 0 || s > m => Err(Error::Config(format!(
                "fixed-count selection needs 1 <= s <= m = {m}, got s = {s}"
            ))),
            SelectionRule::Epsilon { epsilon } if !(epsilon >= 0.0 && epsilon.is_finite()) => {
                Err(Error::Config(format!("epsilon must be finite and >= 0, got {epsilon}")))
            }
            _ => Ok(()),
        }
    }

    /// Largest number of arms the rule can carry forward out of `m`.
    pub fn max_selected(&self, m: usize) -> usize {
        match *self {
            SelectionRule::FixedCount { s } => s.min(m),
            SelectionRule::Epsilon { .. } => m,
        }
    }
}

impl fmt::Display for SelectionRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SelectionRule::FixedCount { s } => write!(f, "s={s}"),
            SelectionRule::Epsilon { epsilon } => write!(f, "eps={epsilon}"),
        }
    }
}

/// Stage weights of the inverse normal combination, `w1² + w2² = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Weights {
    w1: f64,
    w2: f64,
}

impl Weights {
    pub fn new(w1: f64, w2: f64) -> Result<Self> {
        if !(w1 >= 0.0 && w2 >= 0.0) || !(w1 * w1 + w2 * w2 - 1.0).abs().le(&1e-12) {
            return Err(Error::Config(format!(
                "weights must be nonnegative with w1^2 + w2^2 = 1, got ({w1}, {w2})"
            )));
        }
        Ok(Self { w1, w2 })
    }

    /// `(1/√2, 1/√2)`.
    pub fn equal() -> Self {
        let w = std::f64::consts::FRAC_1_SQRT_2;
        Self { w1: w, w2: w }
    }

    pub fn w1(&self) -> f64 {
        self.w1
    }

    pub fn w2(&self) -> f64 {
        self.w2
    }
}

/// Weights proportional to the square roots of the planned stage sizes.
pub fn jenkins_weights(n1: usize, n2: usize) -> Result<Weights> {
    if n1 == 0 || n2 == 0 {
        return Err(Error::Config(format!("stage sizes must be >= 1, got ({n1}, {n2})")));
    }
    let total = (n1 + n2) as f64;
    Ok(Weights {
        w1: (n1 as f64 / total).sqrt(),
        w2: (n2 as f64 / total).sqrt(),
    })
}

/// Pre-specified two-stage design.
///
/// Boundaries default to `alpha1 = 0`, `alpha0 = 1` (no early stopping) and
/// the weights to [`jenkins_weights`] of the planned group sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialDesign {
    m: usize,
    n1: usize,
    n2: usize,
    alpha: f64,
    alpha0: f64,
    alpha1: f64,
    selection: SelectionRule,
    weights: Weights,
}

impl TrialDesign {
    pub fn new(m: usize, n1: usize, n2: usize, alpha: f64, selection: SelectionRule) -> Result<Self> {
        if !(1..=MAX_FAMILY).contains(&m) {
            return Err(Error::Config(format!("m must be in 1..={MAX_FAMILY}, got {m}")));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Config(format!("alpha must be in (0, 1), got {alpha}")));
        }
        selection.validate(m)?;
        let weights = jenkins_weights(n1, n2)?;
        Ok(Self { m, n1, n2, alpha, alpha0: 1.0, alpha1: 0.0, selection, weights })
    }

    /// Sets the futility (`alpha0`) and efficacy (`alpha1`) boundaries.
    pub fn with_boundaries(mut self, alpha0: f64, alpha1: f64) -> Result<Self> {
        check_boundaries(alpha0, alpha1)?;
        if alpha1 > self.alpha || self.alpha > alpha0 {
            return Err(Error::Config(format!(
                "boundaries must satisfy alpha1 <= alpha <= alpha0, got alpha1 = {alpha1}, alpha = {}, alpha0 = {alpha0}",
                self.alpha
            )));
        }
        self.alpha0 = alpha0;
        self.alpha1 = alpha1;
        Ok(self)
    }

    /// Replaces the default weights.
    pub fn with_weights(mut self, weights: Weights) -> Self {
        self.weights = weights;
        self
    }

    /// Same rule, level and boundaries with new group sizes and the Jenkins
    /// weights that go with them.
    pub fn resized(&self, n1: usize, n2: usize) -> Result<Self> {
        Self::new(self.m, n1, n2, self.alpha, self.selection)?.with_boundaries(self.alpha0, self.alpha1)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn alpha0(&self) -> f64 {
        self.alpha0
    }

    pub fn alpha1(&self) -> f64 {
        self.alpha1
    }

    pub fn selection(&self) -> SelectionRule {
        self.selection
    }

    pub fn weights(&self) -> Weights {
        self.weights
    }

    /// Share of the maximum total sample size spent in stage one.
    pub fn ratio(&self) -> f64 {
        let first = (self.n1 * (self.m + 1)) as f64;
        let second = (self.n2 * (self.selection.max_selected(self.m) + 1)) as f64;
        first / (first + second)
    }

    /// Subjects used when `selected` arms continue.
    pub fn total_subjects(&self, selected: usize) -> usize {
        self.n1 * (self.m + 1) + self.n2 * (selected + 1)
    }
}

pub(crate) fn check_boundaries(alpha0: f64, alpha1: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&alpha0) || !(0.0..=1.0).contains(&alpha1) {
        return Err(Error::Config(format!(
            "boundaries must lie in [0, 1], got alpha0 = {alpha0}, alpha1 = {alpha1}"
        )));
    }
    if alpha1 > alpha0 {
        return Err(Error::Config(format!(
            "efficacy boundary alpha1 = {alpha1} exceeds futility boundary alpha0 = {alpha0}"
        )));
    }
    Ok(())
}
