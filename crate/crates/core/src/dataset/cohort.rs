use std::collections::HashMap;

use super::load::{ArmRoles, SubjectRecord};
use crate::closed_testing::HypothesisSubset;
use crate::dunnett::GroupSummary;
use crate::error::{Error, Result};

/// Outcomes grouped by arm in analysis order. Index 0 is the control,
/// `1..=m` the active arms.
#[derive(Debug, Clone, PartialEq)]
pub struct Cohort {
    labels: Vec<String>,
    outcomes: Vec<Vec<f64>>,
}

impl Cohort {
    pub fn new(labels: Vec<String>, outcomes: Vec<Vec<f64>>) -> Result<Self> {
        if labels.len() < 2 || labels.len() != outcomes.len() {
            return Err(Error::Input(format!(
                "need a control and at least one active arm with one outcome list each, got {} labels and {} lists",
                labels.len(),
                outcomes.len()
            )));
        }
        if outcomes.iter().flatten().any(|y| !y.is_finite()) {
            return Err(Error::Input("outcomes must be finite".into()));
        }
        Ok(Self { labels, outcomes })
    }

    /// Groups records by arm, each arm sorted by its order index.
    pub fn from_records(records: &[SubjectRecord], roles: &ArmRoles) -> Result<Self> {
        roles.validate()?;
        let labels: Vec<String> = roles.analysed().cloned().collect();
        let index: HashMap<&str, usize> = labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
        let mut arms: Vec<Vec<(u64, f64)>> = vec![Vec::new(); labels.len()];
        for r in records {
            let &i = index
                .get(r.arm.as_str())
                .ok_or_else(|| Error::Input(format!("record with undeclared arm {:?}", r.arm)))?;
            arms[i].push((r.order, r.outcome));
        }
        let outcomes = arms
            .into_iter()
            .map(|mut arm| {
                arm.sort_by_key(|&(order, _)| order);
                arm.into_iter().map(|(_, y)| y).collect()
            })
            .collect();
        Self::new(labels, outcomes)
    }

    /// Number of active arms.
    pub fn m(&self) -> usize {
        self.labels.len() - 1
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn outcomes(&self, arm: usize) -> &[f64] {
        &self.outcomes[arm]
    }

    pub fn arm_size(&self, arm: usize) -> usize {
        self.outcomes[arm].len()
    }

    /// Mean of subjects `from..to` (0-based, exclusive end) of `arm`.
    pub fn segment_mean(&self, arm: usize, from: usize, to: usize) -> Result<f64> {
        let data = &self.outcomes[arm];
        if to > data.len() {
            return Err(Error::Input(format!(
                "arm {:?} has {} subjects, {to} requested",
                self.labels[arm],
                data.len()
            )));
        }
        if to <= from {
            return Err(Error::Input("empty segment".into()));
        }
        Ok(data[from..to].iter().sum::<f64>() / (to - from) as f64)
    }
}

/// Group summaries for the two stages of a nested analysis.
#[derive(Debug, Clone, PartialEq)]
pub struct StageSummaries {
    pub stage1: Vec<GroupSummary>,
    /// Empty when no stage-two subjects were requested.
    pub stage2: Vec<GroupSummary>,
}

/// Stage one uses the first `n1` subjects of every arm; stage two the next
/// `n2` subjects of the control and of each arm in `selected` (all active
/// arms when `None`).
pub fn nested_prefix(
    cohort: &Cohort,
    n1: usize,
    n2: usize,
    selected: Option<&HypothesisSubset>,
) -> Result<StageSummaries> {
    if n1 == 0 {
        return Err(Error::Input("stage-1 group size must be >= 1".into()));
    }
    let mut stage1 = Vec::with_capacity(cohort.m() + 1);
    for arm in 0..=cohort.m() {
        stage1.push(GroupSummary::new(arm, cohort.segment_mean(arm, 0, n1)?, n1)?);
    }
    let mut stage2 = Vec::new();
    if n2 > 0 {
        let arms: Vec<usize> = match selected {
            Some(j) => std::iter::once(0).chain(j.arms()).collect(),
            None => (0..=cohort.m()).collect(),
        };
        for arm in arms {
            if arm > cohort.m() {
                return Err(Error::Input(format!("selected arm {arm} does not exist")));
            }
            stage2.push(GroupSummary::new(arm, cohort.segment_mean(arm, n1, n1 + n2)?, n2)?);
        }
    }
    Ok(StageSummaries { stage1, stage2 })
}

/// Pooled within-arm standard deviation over the first `up_to[i]` subjects of
/// arm `i`: `sqrt(Σ(nᵢ−1)sᵢ² / Σ(nᵢ−1))`.
pub fn pooled_sigma(cohort: &Cohort, up_to: &[usize]) -> Result<f64> {
    if up_to.len() != cohort.m() + 1 {
        return Err(Error::Input(format!("need {} per-arm counts, got {}", cohort.m() + 1, up_to.len())));
    }
    let mut ss = 0.0;
    let mut df = 0usize;
    for (arm, &n) in up_to.iter().enumerate() {
        if n > cohort.arm_size(arm) {
            return Err(Error::Input(format!(
                "arm {:?} has {} subjects, {n} requested",
                cohort.labels[arm],
                cohort.arm_size(arm)
            )));
        }
        if n < 2 {
            continue;
        }
        let data = &cohort.outcomes[arm][..n];
        let mean = data.iter().sum::<f64>() / n as f64;
        ss += data.iter().map(|y| (y - mean).powi(2)).sum::<f64>();
        df += n - 1;
    }
    if df < 2 {
        return Err(Error::Degenerate(format!("{df} degrees of freedom are too few to estimate sigma")));
    }
    let sigma = (ss / df as f64).sqrt();
    if sigma == 0.0 {
        return Err(Error::Degenerate("all arms are constant, sigma is zero".into()));
    }
    Ok(sigma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cohort(arms: Vec<Vec<f64>>) -> Cohort {
        let labels = (0..arms.len()).map(|i| format!("g{i}")).collect();
        Cohort::new(labels, arms).unwrap()
    }

    #[test]
    fn prefix_means() {
        let c = cohort(vec![vec![1.0, 2.0, 3.0, 4.0], vec![1.0, 2.0, 3.0, 4.0]]);
        let s = nested_prefix(&c, 2, 0, None).unwrap();
        assert_eq!(s.stage1[1].mean, 1.5);
        assert!(s.stage2.is_empty());
        let s = nested_prefix(&c, 2, 2, None).unwrap();
        assert_eq!(s.stage2[1].mean, 3.5);
        assert_eq!(s.stage2[1].size, 2);
        assert!(nested_prefix(&c, 4, 1, None).is_err());
        assert!(nested_prefix(&c, 4, 0, None).is_ok());
    }

    #[test]
    fn stage_two_covers_control_and_selection() {
        let c = cohort(vec![vec![0.0; 6], vec![1.0; 6], vec![2.0; 6]]);
        let j = HypothesisSubset::from_arms(&[2], 2).unwrap();
        let s = nested_prefix(&c, 3, 3, Some(&j)).unwrap();
        assert_eq!(s.stage2.iter().map(|g| g.label).collect::<Vec<_>>(), vec![0, 2]);
    }

    #[test]
    fn insufficient_subjects_names_arm() {
        let c = Cohort::new(vec!["ctl".into(), "short".into()], vec![vec![0.0; 5], vec![0.0; 3]]).unwrap();
        let err = nested_prefix(&c, 4, 0, None).unwrap_err().to_string();
        assert!(err.contains("short"), "{err}");
    }

    #[test]
    fn sigma_examples() {
        let c = cohort(vec![vec![0.0, 2.0], vec![0.0, 2.0]]);
        assert!((pooled_sigma(&c, &[2, 2]).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        let c = cohort(vec![vec![1.0], vec![2.0]]);
        assert!(pooled_sigma(&c, &[1, 1]).is_err());
        let c = cohort(vec![vec![3.0; 4], vec![1.0; 4]]);
        assert!(matches!(pooled_sigma(&c, &[4, 4]), Err(Error::Degenerate(_))));
        let c = cohort(vec![vec![0.0, 2.0, 5.0], vec![0.0, 2.0]]);
        assert!(pooled_sigma(&c, &[3, 3]).is_err());
        // Unequal counts weight by degrees of freedom.
        let s = pooled_sigma(&c, &[3, 2]).unwrap();
        let expected = ((2.0 * 19.0 / 3.0 + 2.0) / 3.0f64).sqrt();
        assert!((s - expected).abs() < 1e-12, "{s} {expected}");
    }

    #[test]
    fn records_grouped_by_order() {
        let recs = vec![
            SubjectRecord { arm: "A".into(), outcome: 5.0, order: 9 },
            SubjectRecord { arm: "c".into(), outcome: 1.0, order: 0 },
            SubjectRecord { arm: "A".into(), outcome: 4.0, order: 2 },
        ];
        let c = Cohort::from_records(&recs, &ArmRoles::new("c", vec!["A".into()])).unwrap();
        assert_eq!(c.outcomes(1), &[4.0, 5.0]);
        assert_eq!(c.labels(), &["c".to_string(), "A".to_string()]);
        let bad = vec![SubjectRecord { arm: "Z".into(), outcome: 1.0, order: 0 }];
        assert!(Cohort::from_records(&bad, &ArmRoles::new("c", vec!["A".into()])).is_err());
    }

    proptest! {
        #[test]
        fn sigma_scale_equivariant(
            a in proptest::collection::vec(-10.0f64..10.0, 3..8),
            b in proptest::collection::vec(-10.0f64..10.0, 3..8),
            k in -5.0f64..5.0,
        ) {
            prop_assume!(k.abs() > 1e-3);
            let c = cohort(vec![a.clone(), b.clone()]);
            let scaled = cohort(vec![a.iter().map(|x| x * k).collect(), b.iter().map(|x| x * k).collect()]);
            let up = [a.len(), b.len()];
            if let Ok(s) = pooled_sigma(&c, &up) {
                let t = pooled_sigma(&scaled, &up).unwrap();
                prop_assert!((t - k.abs() * s).abs() < 1e-9 * (1.0 + t));
            }
        }
    }
}
