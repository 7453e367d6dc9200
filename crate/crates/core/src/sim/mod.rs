//! Monte Carlo evaluation of single- and two-stage designs.

mod effects;
mod engine;
mod sweep;

pub use effects::{clustered_effects, linear_effects, EffectConfiguration, EffectShape};
pub use engine::{simulate_single_stage, simulate_two_stage, Estimate, SimulationSummary};
pub use sweep::{
    power_sweep, selection_prob_sweep, single_stage_group_size, sweep_csv_header, two_stage_group_sizes,
    write_sweep_csv, DesignSpec, GridPoint, GroupSizes, SweepRow, SweepSettings,
};
