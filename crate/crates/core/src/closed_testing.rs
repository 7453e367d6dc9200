//! Intersection-hypothesis lattice and the closed testing principle.
//!
//! An individual hypothesis `Hᵢ` is rejected at level α exactly when every
//! intersection hypothesis `H_I` with `i ∈ I` has a local p-value `≤ α`.
//! Local tests are pluggable: Dunnett for the designs in this crate,
//! Bonferroni as a distribution-free reference.

use std::collections::BTreeMap;
use std::fmt;

use crate::dunnett::{self, ZStatistics, MAX_ARMS};
use crate::error::{Error, Result};
use crate::stats::QuadratureRule;

/// Largest family for which the full lattice is enumerated.
pub const MAX_FAMILY: usize = 20;

/// A non-empty subset `I ⊆ {1..m}`; bit `i-1` of the mask marks arm `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HypothesisSubset {
    m: u8,
    mask: u64,
}

impl HypothesisSubset {
    pub fn new(mask: u64, m: usize) -> Result<Self> {
        if !(1..=MAX_ARMS).contains(&m) {
            return Err(Error::Config(format!("family size must be in 1..={MAX_ARMS}, got {m}")));
        }
        if mask == 0 {
            return Err(Error::Input("intersection hypotheses need a non-empty index set".into()));
        }
        if m < 64 && mask >> m != 0 {
            return Err(Error::Input(format!("mask {mask:#b} has arms beyond m = {m}")));
        }
        Ok(Self { m: m as u8, mask })
    }

    /// Subset built from 1-based arm labels.
    pub fn from_arms(arms: &[usize], m: usize) -> Result<Self> {
        let mut mask = 0u64;
        for &a in arms {
            if a == 0 || a > m {
                return Err(Error::Input(format!("arm {a} outside 1..={m}")));
            }
            mask |= 1 << (a - 1);
        }
        Self::new(mask, m)
    }

    /// `{1, ..., m}`.
    pub fn full(m: usize) -> Result<Self> {
        let mask = if m >= 64 { u64::MAX } else { (1u64 << m) - 1 };
        Self::new(mask, m)
    }

    pub fn mask(&self) -> u64 {
        self.mask
    }

    pub fn family_size(&self) -> usize {
        self.m as usize
    }

    pub fn len(&self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, arm: usize) -> bool {
        arm >= 1 && arm <= self.m as usize && self.mask & (1 << (arm - 1)) != 0
    }

    pub fn is_subset_of(&self, other: &HypothesisSubset) -> bool {
        self.mask & !other.mask == 0
    }

    /// `I ∩ J`, or `None` when empty.
    pub fn intersect(&self, other: &HypothesisSubset) -> Option<HypothesisSubset> {
        let mask = self.mask & other.mask;
        (mask != 0).then_some(HypothesisSubset { m: self.m, mask })
    }

    /// Arm labels in increasing order.
    pub fn arms(&self) -> impl Iterator<Item = usize> + '_ {
        (1..=self.m as usize).filter(move |&a| self.contains(a))
    }
}

impl fmt::Display for HypothesisSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let arms: Vec<String> = self.arms().map(|a| a.to_string()).collect();
        write!(f, "{{{}}}", arms.join(","))
    }
}

/// Local p-value of every intersection hypothesis under consideration.
pub type IntersectionPValues = BTreeMap<HypothesisSubset, f64>;

/// All `2^m − 1` non-empty subsets, in ascending mask order.
pub fn enumerate_subsets(m: usize) -> Result<Vec<HypothesisSubset>> {
    if !(1..=MAX_FAMILY).contains(&m) {
        return Err(Error::Config(format!("family size must be in 1..={MAX_FAMILY}, got {m}")));
    }
    Ok((1u64..1 << m).map(|mask| HypothesisSubset { m: m as u8, mask }).collect())
}

/// Non-empty subsets of `within`, ascending by mask.
pub fn subsets_of(within: &HypothesisSubset) -> Vec<HypothesisSubset> {
    let full = within.mask;
    let mut out = Vec::with_capacity((1usize << within.len()) - 1);
    // Enumerate submasks in increasing order.
    let mut sub = 0u64;
    loop {
        sub = sub.wrapping_sub(full) & full;
        if sub == 0 {
            break;
        }
        out.push(HypothesisSubset { m: within.m, mask: sub });
    }
    out
}

/// Dunnett p-value of `max_{i∈I} zᵢ` with `k = |I|` for each subset.
pub fn dunnett_local_pvalues(
    z: &ZStatistics,
    subsets: &[HypothesisSubset],
    rule: &QuadratureRule,
) -> Result<IntersectionPValues> {
    let mut out = BTreeMap::new();
    for subset in subsets {
        let mut zmax = f64::NEG_INFINITY;
        for arm in subset.arms() {
            let v = z.get(arm).ok_or_else(|| {
                Error::Input(format!("subset {subset} uses arm {arm} without a statistic"))
            })?;
            zmax = zmax.max(v);
        }
        out.insert(*subset, dunnett::upper_tail(zmax, subset.len(), rule));
    }
    Ok(out)
}

/// `p_I = min(1, |I|·min_{i∈I} pᵢ)`; `raw[i-1]` is the p-value of arm `i`.
pub fn bonferroni_local_pvalues(
    raw: &[f64],
    subsets: &[HypothesisSubset],
) -> Result<IntersectionPValues> {
    if let Some(p) = raw.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::Input(format!("p-value {p} outside [0, 1]")));
    }
    let mut out = BTreeMap::new();
    for subset in subsets {
        let mut min = f64::INFINITY;
        for arm in subset.arms() {
            let p = raw
                .get(arm - 1)
                .ok_or_else(|| Error::Input(format!("no raw p-value for arm {arm}")))?;
            min = min.min(*p);
        }
        out.insert(*subset, (subset.len() as f64 * min).min(1.0));
    }
    Ok(out)
}

/// Result of applying the closure to a complete set of local p-values.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedTestOutcome {
    pvalues: IntersectionPValues,
    rejected: Vec<bool>,
    alpha: f64,
}

impl ClosedTestOutcome {
    /// Outcome that rejects nothing, keeping the p-values for audit.
    pub fn no_rejections(pvalues: IntersectionPValues, m: usize, alpha: f64) -> Self {
        Self { pvalues, rejected: vec![false; m], alpha }
    }

    pub fn pvalues(&self) -> &IntersectionPValues {
        &self.pvalues
    }

    /// `rejected()[i-1]` is the decision for `Hᵢ`.
    pub fn rejected(&self) -> &[bool] {
        &self.rejected
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn is_rejected(&self, arm: usize) -> bool {
        arm >= 1 && self.rejected.get(arm - 1).copied().unwrap_or(false)
    }

    pub fn any_rejected(&self) -> bool {
        self.rejected.iter().any(|&r| r)
    }

    pub fn all_rejected(&self) -> bool {
        self.rejected.iter().all(|&r| r)
    }

    pub fn rejection_count(&self) -> usize {
        self.rejected.iter().filter(|&&r| r).count()
    }
}

/// Applies the closed testing principle at level `alpha`. Ties `p = α` reject.
pub fn closed_test(pvalues: IntersectionPValues, m: usize, alpha: f64) -> Result<ClosedTestOutcome> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("alpha must be in (0, 1), got {alpha}")));
    }
    for subset in enumerate_subsets(m)? {
        if !pvalues.contains_key(&subset) {
            return Err(Error::Input(format!("no local p-value for intersection {subset}")));
        }
    }
    let mut rejected = vec![true; m];
    for (subset, &p) in &pvalues {
        if subset.family_size() != m {
            return Err(Error::Input(format!("subset {subset} belongs to a different family")));
        }
        // NaN never rejects.
        if p.is_nan() || p > alpha {
            for arm in subset.arms() {
                rejected[arm - 1] = false;
            }
        }
    }
    Ok(ClosedTestOutcome { pvalues, rejected, alpha })
}
