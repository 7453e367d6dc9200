//! Grids of designs and effect sizes under a fixed total sample size.

use std::io::Write;

use super::effects::EffectShape;
use super::engine::{simulate_single_stage, simulate_two_stage, SimulationSummary};
use crate::adaptive::{SelectionRule, TrialDesign};
use crate::error::{Error, Result};

/// Integer per-group sizes of a two-stage design.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroupSizes {
    pub n1: usize,
    pub n2: usize,
}

/// Splits `budget` subjects so that stage one (all `m + 1` groups) gets
/// about `ratio` of it and stage two (`carried + 1` groups) the rest.
///
/// `n1 = round(ratio·budget/(m+1))`, `n2 = floor((budget − n1·(m+1))/(carried+1))`,
/// so the design never exceeds the budget.
pub fn two_stage_group_sizes(budget: usize, m: usize, carried: usize, ratio: f64) -> Result<GroupSizes> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::Config(format!("ratio must be in (0, 1), got {ratio}")));
    }
    if m == 0 || carried == 0 || carried > m {
        return Err(Error::Config(format!("need 1 <= carried <= m, got carried = {carried}, m = {m}")));
    }
    let n1 = (ratio * budget as f64 / (m + 1) as f64).round() as usize;
    if n1 == 0 {
        return Err(Error::Config(format!("stage-1 group size rounds to 0 (budget {budget}, ratio {ratio})")));
    }
    let used = n1 * (m + 1);
    let n2 = budget.saturating_sub(used) / (carried + 1);
    if n2 == 0 {
        return Err(Error::Config(format!(
            "stage-2 group size rounds to 0 (budget {budget}, ratio {ratio}, n1 = {n1})"
        )));
    }
    Ok(GroupSizes { n1, n2 })
}

/// `floor(budget/(m+1))` per group.
pub fn single_stage_group_size(budget: usize, m: usize) -> Result<usize> {
    let n = budget / (m + 1);
    if n == 0 {
        return Err(Error::Config(format!("budget {budget} is too small for {} groups", m + 1)));
    }
    Ok(n)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DesignSpec {
    SingleStage,
    TwoStage { selection: SelectionRule, ratio: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub shape: EffectShape,
    pub delta: f64,
    pub design: DesignSpec,
}

/// Parameters shared by every point of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSettings {
    pub m: usize,
    pub budget: usize,
    pub alpha: f64,
    pub alpha0: f64,
    pub alpha1: f64,
    pub sigma: f64,
    pub replications: u64,
    pub seed: u64,
}

impl SweepSettings {
    /// No early stopping, σ = 1.
    pub fn new(m: usize, budget: usize, alpha: f64, replications: u64, seed: u64) -> Self {
        Self { m, budget, alpha, alpha0: 1.0, alpha1: 0.0, sigma: 1.0, replications, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.m > crate::closed_testing::MAX_FAMILY {
            return Err(Error::Config(format!("m must be in 1..={}, got {}", crate::closed_testing::MAX_FAMILY, self.m)));
        }
        if self.budget == 0 {
            return Err(Error::Config("budget must be >= 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!("alpha must be in (0, 1), got {}", self.alpha)));
        }
        if !(0.0..=self.alpha).contains(&self.alpha1) || !(self.alpha..=1.0).contains(&self.alpha0) {
            return Err(Error::Config(format!(
                "boundaries must satisfy 0 <= alpha1 <= alpha <= alpha0 <= 1, got alpha1 = {}, alpha0 = {}",
                self.alpha1, self.alpha0
            )));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::Config(format!("sigma must be positive, got {}", self.sigma)));
        }
        if self.replications == 0 {
            return Err(Error::Config("replications must be >= 1".into()));
        }
        Ok(())
    }
}

/// One sweep result. `outcome` holds the reason when the point could not be run.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub point: GridPoint,
    pub m: usize,
    pub n1: Option<usize>,
    pub n2: Option<usize>,
    pub ratio_realized: Option<f64>,
    pub outcome: std::result::Result<SimulationSummary, String>,
}

fn run_point(point: GridPoint, settings: &SweepSettings) -> SweepRow {
    let mut row = SweepRow {
        point,
        m: settings.m,
        n1: None,
        n2: None,
        ratio_realized: None,
        outcome: Err(String::new()),
    };
    let result = (|| -> Result<SimulationSummary> {
        let config = point.shape.configuration(settings.m, point.delta)?.with_sigma(settings.sigma)?;
        match point.design {
            DesignSpec::SingleStage => {
                let n = single_stage_group_size(settings.budget, settings.m)?;
                row.n1 = Some(n);
                simulate_single_stage(&config, n, settings.alpha, settings.replications, settings.seed)
            }
            DesignSpec::TwoStage { selection, ratio } => {
                selection.validate(settings.m)?;
                let carried = selection.max_selected(settings.m);
                let sizes = two_stage_group_sizes(settings.budget, settings.m, carried, ratio)?;
                row.n1 = Some(sizes.n1);
                row.n2 = Some(sizes.n2);
                let design = TrialDesign::new(settings.m, sizes.n1, sizes.n2, settings.alpha, selection)?
                    .with_boundaries(settings.alpha0, settings.alpha1)?;
                row.ratio_realized = Some(design.ratio());
                simulate_two_stage(&config, &design, settings.replications, settings.seed)
            }
        }
    })();
    row.outcome = result.map_err(|e| e.to_string());
    row
}

/// Simulates every grid point in order. Every point uses the same seed, so
/// points share random numbers replication by replication. Points that
/// cannot be realised yield a row with an error message.
pub fn power_sweep(grid: &[GridPoint], settings: &SweepSettings) -> Result<Vec<SweepRow>> {
    settings.validate()?;
    Ok(grid.iter().map(|&p| run_point(p, settings)).collect())
}

/// Power and selection probabilities of one design across stage-1 ratios.
pub fn selection_prob_sweep(
    shape: EffectShape,
    delta: f64,
    selection: SelectionRule,
    ratios: &[f64],
    settings: &SweepSettings,
) -> Result<Vec<SweepRow>> {
    let grid: Vec<GridPoint> = ratios
        .iter()
        .map(|&ratio| GridPoint { shape, delta, design: DesignSpec::TwoStage { selection, ratio } })
        .collect();
    power_sweep(&grid, settings)
}

/// Column names for a family of `m` hypotheses.
pub fn sweep_csv_header(m: usize) -> Vec<String> {
    let mut cols: Vec<String> = [
        "design", "shape", "eta", "m", "delta", "s", "epsilon", "r", "r_realized", "n1", "n2",
        "replications", "power_any", "power_any_se", "power_all", "power_all_se",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    cols.extend((1..=m).map(|i| format!("power_h{i}")));
    cols.extend((1..=m).map(|i| format!("select_{i}")));
    cols.extend(["stop_efficacy", "stop_futility", "status"].iter().map(|s| s.to_string()));
    cols
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes sweep rows as CSV with [`sweep_csv_header`] columns.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], m: usize, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(sweep_csv_header(m)).map_err(csv_err)?;
    for row in rows {
        let (design, s, eps, r) = match row.point.design {
            DesignSpec::SingleStage => ("single", None, None, None),
            DesignSpec::TwoStage { selection, ratio } => match selection {
                SelectionRule::FixedCount { s } => ("two-stage", Some(s), None, Some(ratio)),
                SelectionRule::Epsilon { epsilon } => ("two-stage", None, Some(epsilon), Some(ratio)),
            },
        };
        let mut rec = vec![
            design.to_string(),
            row.point.shape.name().to_string(),
            opt(row.point.shape.eta()),
            row.m.to_string(),
            row.point.delta.to_string(),
            opt(s),
            opt(eps),
            opt(r),
            opt(row.ratio_realized),
            opt(row.n1),
            opt(row.n2),
        ];
        match &row.outcome {
            Ok(sum) => {
                rec.push(sum.replications.to_string());
                for e in [sum.power_any, sum.power_all] {
                    rec.push(e.value.to_string());
                    rec.push(e.se.to_string());
                }
                rec.extend(sum.power_per_hypothesis.iter().map(|e| e.value.to_string()));
                if sum.selection.is_empty() {
                    rec.extend((0..m).map(|_| String::new()));
                } else {
                    rec.extend(sum.selection.iter().map(|e| e.value.to_string()));
                }
                rec.push(sum.stop_efficacy.value.to_string());
                rec.push(sum.stop_futility.value.to_string());
                rec.push("ok".to_string());
            }
            Err(msg) => {
                rec.extend((0..5 + 2 * m + 2).map(|_| String::new()));
                rec.push(format!("error: {msg}"));
            }
        }
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn group_sizes_for_budget_100() {
        let g = |s, r| two_stage_group_sizes(100, 2, s, r).unwrap();
        assert_eq!(g(1, 0.33), GroupSizes { n1: 11, n2: 33 });
        assert_eq!(g(2, 0.33), GroupSizes { n1: 11, n2: 22 });
        assert_eq!(g(1, 0.67), GroupSizes { n1: 22, n2: 17 });
        assert_eq!(g(2, 0.67), GroupSizes { n1: 22, n2: 11 });
        assert_eq!(single_stage_group_size(100, 2).unwrap(), 33);
    }

    #[test]
    fn infeasible_sizes() {
        assert!(two_stage_group_sizes(100, 2, 1, 0.0).is_err());
        assert!(two_stage_group_sizes(100, 2, 1, 1.0).is_err());
        assert!(two_stage_group_sizes(100, 2, 1, 0.01).is_err());
        assert!(two_stage_group_sizes(100, 2, 1, 0.99).is_err());
        assert!(two_stage_group_sizes(100, 2, 3, 0.5).is_err());
        assert!(single_stage_group_size(2, 2).is_err());
    }

    #[test]
    fn budget_is_never_exceeded() {
        for budget in [10, 37, 100, 1000, 10_000] {
            for m in 1..=4 {
                for s in 1..=m {
                    for k in 1..20 {
                        let r = k as f64 / 20.0;
                        if let Ok(g) = two_stage_group_sizes(budget, m, s, r) {
                            assert!(g.n1 * (m + 1) + g.n2 * (s + 1) <= budget);
                        }
                    }
                }
            }
        }
    }

    fn desk_grid() -> Vec<GridPoint> {
        let mut grid = Vec::new();
        for &s in &[1, 2] {
            for &ratio in &[0.33, 0.67] {
                for k in 0..7 {
                    let delta = 0.2 + 0.1 * k as f64;
                    let design = DesignSpec::TwoStage { selection: SelectionRule::FixedCount { s }, ratio };
                    grid.push(GridPoint { shape: EffectShape::Linear, delta, design });
                }
            }
        }
        grid
    }

    #[test]
    fn desk_grid_has_28_rows() {
        let rows = power_sweep(&desk_grid(), &SweepSettings::new(2, 100, 0.025, 50, 1)).unwrap();
        assert_eq!(rows.len(), 28);
        assert!(rows.iter().all(|r| r.outcome.is_ok()));
        assert_eq!((rows[0].n1, rows[0].n2), (Some(11), Some(33)));
    }

    #[test]
    fn degenerate_sweep() {
        let p = GridPoint { shape: EffectShape::Linear, delta: 0.5, design: DesignSpec::SingleStage };
        let rows = power_sweep(&[p], &SweepSettings::new(2, 100, 0.025, 1, 1)).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].outcome.as_ref().unwrap().replications, 1);
    }

    #[test]
    fn infeasible_points_become_error_rows() {
        let fc = SelectionRule::FixedCount { s: 1 };
        let rows =
            selection_prob_sweep(EffectShape::Linear, 0.5, fc, &[0.0, 0.5, 1.0], &SweepSettings::new(2, 100, 0.025, 20, 1))
                .unwrap();
        assert!(rows[0].outcome.is_err());
        assert!(rows[1].outcome.is_ok());
        assert!(rows[2].outcome.is_err());
        let mut buf = Vec::new();
        write_sweep_csv(&rows, 2, &mut buf).unwrap();
        let mut reader = csv::Reader::from_reader(buf.as_slice());
        let width = reader.headers().unwrap().len();
        let records: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
        assert_eq!(records.len(), 3);
        assert!(records.iter().all(|r| r.len() == width));
        assert!(records[0][width - 1].starts_with("error: ") && records[0][width - 1].contains("ratio must be in (0, 1)"));
        assert_eq!(&records[1][width - 1], "ok");
    }

    #[test]
    fn settings_are_validated() {
        let mut s = SweepSettings::new(2, 100, 0.025, 10, 1);
        assert!(s.validate().is_ok());
        s.alpha1 = 0.05;
        assert!(power_sweep(&[], &s).is_err());
        let s = SweepSettings::new(2, 100, 0.025, 0, 1);
        assert!(s.validate().is_err());
    }

    #[test]
    fn header_layout() {
        let h = sweep_csv_header(3);
        assert_eq!(h.len(), 16 + 6 + 3);
        assert_eq!(h[16], "power_h1");
        assert_eq!(h[19], "select_1");
        assert_eq!(h.last().unwrap(), "status");
    }
}
