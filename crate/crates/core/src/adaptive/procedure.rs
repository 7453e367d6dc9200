//! The adaptive closed test with treatment selection at an interim look.
//!
//! 1. Dunnett p-values `p1^I` from stage one for every non-empty `I`.
//! 2. Early stopping on the global intersection `p1^{1..m}`.
//! 3. Selection of the continuing arms `J`.
//! 4. Dunnett p-values `p2^K` from stage two for every non-empty `K ⊆ J`.
//! 5. Combined `p_c^I = C(p1^I, p2^{I∩J})`, with `p2 = 1` when `I ∩ J = ∅`,
//!    then closure at `alpha`.

use std::fmt;

use super::combination::inverse_normal_combine;
use super::design::TrialDesign;
use super::selection::select_treatments;
use crate::closed_testing::{
    closed_test, dunnett_local_pvalues, enumerate_subsets, subsets_of, ClosedTestOutcome,
    HypothesisSubset, IntersectionPValues,
};
use crate::dunnett::ZStatistics;
use crate::error::{Error, Result};
use crate::stats::QuadratureRule;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StopReason {
    None,
    Efficacy,
    Futility,
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StopReason::None => "none",
            StopReason::Efficacy => "efficacy",
            StopReason::Futility => "futility",
        })
    }
}

/// State after the interim look: stage-1 p-values, selection and the
/// stopping decision.
#[derive(Debug, Clone)]
pub struct Interim<'a> {
    design: &'a TrialDesign,
    stage1_pvalues: IntersectionPValues,
    selected: HypothesisSubset,
    stop: StopReason,
}

impl<'a> Interim<'a> {
    pub fn analyze(stage1: &ZStatistics, design: &'a TrialDesign, rule: &QuadratureRule) -> Result<Self> {
        let m = design.m();
        if stage1.len() != m {
            return Err(Error::Input(format!(
                "stage-1 statistics cover {} arms, design has m = {m}",
                stage1.len()
            )));
        }
        let stage1_pvalues = dunnett_local_pvalues(stage1, &enumerate_subsets(m)?, rule)?;
        let selected = select_treatments(stage1, design.selection())?;
        let global = stage1_pvalues[&HypothesisSubset::full(m)?];
        let stop = if design.alpha1() > 0.0 && global <= design.alpha1() {
            StopReason::Efficacy
        } else if global > design.alpha0() {
            StopReason::Futility
        } else {
            StopReason::None
        };
        Ok(Self { design, stage1_pvalues, selected, stop })
    }

    pub fn stage1_pvalues(&self) -> &IntersectionPValues {
        &self.stage1_pvalues
    }

    /// Arms chosen by the selection rule, computed even when the trial stops.
    pub fn selected(&self) -> HypothesisSubset {
        self.selected
    }

    pub fn stop(&self) -> StopReason {
        self.stop
    }

    pub fn continues(&self) -> bool {
        self.stop == StopReason::None
    }

    /// Final decisions. `stage2` must cover exactly the selected arms unless
    /// the trial stopped at the interim, in which case it is ignored.
    pub fn complete(self, stage2: Option<&ZStatistics>, rule: &QuadratureRule) -> Result<TwoStageOutcome> {
        let m = self.design.m();
        match self.stop {
            StopReason::Efficacy => {
                let decision = closed_test(self.stage1_pvalues.clone(), m, self.design.alpha1())?;
                Ok(self.stopped(decision))
            }
            StopReason::Futility => {
                let decision = ClosedTestOutcome::no_rejections(self.stage1_pvalues.clone(), m, self.design.alpha());
                Ok(self.stopped(decision))
            }
            StopReason::None => {
                let stage2 = stage2.ok_or_else(|| Error::Input("stage-2 statistics are required".into()))?;
                let expected: Vec<usize> = self.selected.arms().collect();
                if stage2.arms() != expected.as_slice() {
                    return Err(Error::Input(format!(
                        "stage-2 statistics cover arms {:?}, selected set is {}",
                        stage2.arms(),
                        self.selected
                    )));
                }
                let stage2_pvalues = dunnett_local_pvalues(stage2, &subsets_of(&self.selected), rule)?;
                let combined = combine_stages(&self.stage1_pvalues, &stage2_pvalues, self.selected, self.design)?;
                let decision = closed_test(combined.pvalues.clone(), m, self.design.alpha())?;
                debug_assert!((1..=m).all(|i| self.selected.contains(i) || !decision.is_rejected(i)));
                Ok(TwoStageOutcome {
                    selected: self.selected,
                    stage1_pvalues: self.stage1_pvalues,
                    stage2_pvalues,
                    combined_pvalues: combined.pvalues,
                    clamped: combined.clamped,
                    stopped_early: StopReason::None,
                    decision,
                })
            }
        }
    }

    fn stopped(self, decision: ClosedTestOutcome) -> TwoStageOutcome {
        TwoStageOutcome {
            selected: self.selected,
            combined_pvalues: self.stage1_pvalues.clone(),
            stage1_pvalues: self.stage1_pvalues,
            stage2_pvalues: IntersectionPValues::new(),
            clamped: Vec::new(),
            stopped_early: self.stop,
            decision,
        }
    }
}

/// Combined intersection p-values and the subsets whose inputs were clamped.
#[derive(Debug, Clone, PartialEq)]
pub struct CombinedPValues {
    pub pvalues: IntersectionPValues,
    pub clamped: Vec<HypothesisSubset>,
}

/// Step 5 before closure: `p_c^I = C(p1^I, p2^{I∩J})` for every `I`.
///
/// `stage2` must hold a p-value for each non-empty subset of `selected`.
/// Intersections disjoint from `selected` get `p_c = 1`, the limit of `C`
/// as `p2 → 1`.
pub fn combine_stages(
    stage1: &IntersectionPValues,
    stage2: &IntersectionPValues,
    selected: HypothesisSubset,
    design: &TrialDesign,
) -> Result<CombinedPValues> {
    let mut pvalues = IntersectionPValues::new();
    let mut clamped = Vec::new();
    for subset in enumerate_subsets(design.m())? {
        let p1 = *stage1
            .get(&subset)
            .ok_or_else(|| Error::Input(format!("no stage-1 p-value for {subset}")))?;
        let pc = match subset.intersect(&selected) {
            None => 1.0,
            Some(kept) => {
                let p2 = *stage2
                    .get(&kept)
                    .ok_or_else(|| Error::Input(format!("no stage-2 p-value for {kept}")))?;
                let c = inverse_normal_combine(p1, p2, design.weights())?;
                if c.clamped {
                    clamped.push(subset);
                }
                c.p
            }
        };
        pvalues.insert(subset, pc);
    }
    Ok(CombinedPValues { pvalues, clamped })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoStageOutcome {
    selected: HypothesisSubset,
    stage1_pvalues: IntersectionPValues,
    stage2_pvalues: IntersectionPValues,
    combined_pvalues: IntersectionPValues,
    clamped: Vec<HypothesisSubset>,
    stopped_early: StopReason,
    decision: ClosedTestOutcome,
}

impl TwoStageOutcome {
    pub fn selected(&self) -> HypothesisSubset {
        self.selected
    }

    pub fn stage1_pvalues(&self) -> &IntersectionPValues {
        &self.stage1_pvalues
    }

    /// Empty when the trial stopped at the interim.
    pub fn stage2_pvalues(&self) -> &IntersectionPValues {
        &self.stage2_pvalues
    }

    /// After an early stop these are the stage-1 p-values.
    pub fn combined_pvalues(&self) -> &IntersectionPValues {
        &self.combined_pvalues
    }

    /// Intersections whose combination needed clamped inputs.
    pub fn clamped(&self) -> &[HypothesisSubset] {
        &self.clamped
    }

    pub fn stopped_early(&self) -> StopReason {
        self.stopped_early
    }

    pub fn decision(&self) -> &ClosedTestOutcome {
        &self.decision
    }
}

/// Runs the full two-stage procedure.
pub fn two_stage_closed_test(
    stage1: &ZStatistics,
    stage2: Option<&ZStatistics>,
    design: &TrialDesign,
    rule: &QuadratureRule,
) -> Result<TwoStageOutcome> {
    Interim::analyze(stage1, design, rule)?.complete(stage2, rule)
}
