//! Two-stage adaptive designs with treatment selection.

mod combination;
mod design;
mod procedure;
mod selection;

pub use combination::{combination_type1_error, inverse_normal_combine, Combination, P_CLAMP};
pub use design::{jenkins_weights, SelectionRule, TrialDesign, Weights};
pub use procedure::{combine_stages, two_stage_closed_test, CombinedPValues, Interim, StopReason, TwoStageOutcome};
pub use selection::select_treatments;
