use super::design::SelectionRule;
use crate::closed_testing::HypothesisSubset;
use crate::dunnett::ZStatistics;
use crate::error::{Error, Result};

/// Applies the interim selection rule to stage-1 statistics for arms `1..=m`.
pub fn select_treatments(z1: &ZStatistics, rule: SelectionRule) -> Result<HypothesisSubset> {
    let m = z1.len();
    if m == 0 || z1.arms().iter().enumerate().any(|(i, &a)| a != i + 1) {
        return Err(Error::Input("selection needs stage-1 statistics for arms 1..=m".into()));
    }
    rule.validate(m)?;
    let z = z1.values();
    let mask = match rule {
        SelectionRule::FixedCount { s } => {
            let mut order: Vec<usize> = (0..m).collect();
            // Stable sort keeps the lower index first on ties.
            order.sort_by(|&a, &b| z[b].total_cmp(&z[a]));
            order[..s].iter().fold(0u64, |acc, &i| acc | 1 << i)
        }
        SelectionRule::Epsilon { epsilon } => {
            let best = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            z.iter()
                .enumerate()
                .filter(|(_, &v)| v >= best - epsilon)
                .fold(0u64, |acc, (i, _)| acc | 1 << i)
        }
    };
    HypothesisSubset::new(mask, m)
}
