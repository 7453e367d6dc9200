//! Nested single- and two-stage analyses of per-subject data.

mod cohort;
mod load;
mod tables;

pub use cohort::{nested_prefix, pooled_sigma, Cohort, StageSummaries};
pub use load::{load_subjects, ArmRoles, ColumnMapping, SubjectRecord};
pub use tables::{
    group_mean_trajectories, render_table, single_stage_table, two_stage_table, write_table_csv,
    write_trajectories_csv, HypothesisResult, RejectionTableRow, TrajectoryPoint,
};
