//! Rejection tables of nested analyses and running group means.

use std::fmt::Write as _;
use std::io::Write;

use super::cohort::{nested_prefix, pooled_sigma, Cohort};
use crate::adaptive::{Interim, StopReason, TrialDesign};
use crate::closed_testing::{closed_test, dunnett_local_pvalues, enumerate_subsets, ClosedTestOutcome, HypothesisSubset};
use crate::dunnett::z_statistics;
use crate::error::{Error, Result};
use crate::stats::QuadratureRule;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypothesisResult {
    pub rejected: bool,
    /// `x̄ᵢ − x̄₀` on all data the arm contributed.
    pub mean_difference: f64,
    /// True for an arm dropped at the interim, whose difference uses stage-1 data only.
    pub stage1_only: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RejectionTableRow {
    pub n1: usize,
    /// 0 for single-stage rows.
    pub n2: usize,
    /// `n1·(m+1)`.
    pub total1: usize,
    /// `n2·(|J|+1)`; 0 for single-stage rows or after an early stop.
    pub total2: usize,
    /// Plug-in σ used at the final analysis.
    pub sigma: f64,
    pub global_rejected: bool,
    pub hypotheses: Vec<HypothesisResult>,
    pub selected: Option<HypothesisSubset>,
    pub stopped: StopReason,
    pub outcome: ClosedTestOutcome,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Config(format!("alpha must be in (0, 1), got {alpha}")));
    }
    Ok(())
}

fn global_rejected(outcome: &ClosedTestOutcome, m: usize) -> Result<bool> {
    Ok(outcome.pvalues()[&HypothesisSubset::full(m)?] <= outcome.alpha())
}

/// Dunnett closed test on the first `n` subjects of every arm, for each `n`.
pub fn single_stage_table(cohort: &Cohort, sizes: &[usize], alpha: f64) -> Result<Vec<RejectionTableRow>> {
    check_alpha(alpha)?;
    let m = cohort.m();
    let subsets = enumerate_subsets(m)?;
    let rule = QuadratureRule::standard();
    sizes
        .iter()
        .map(|&n| {
            let stages = nested_prefix(cohort, n, 0, None)?;
            let sigma = pooled_sigma(cohort, &vec![n; m + 1])?;
            let z = z_statistics(&stages.stage1, sigma)?;
            let outcome = closed_test(dunnett_local_pvalues(&z, &subsets, rule)?, m, alpha)?;
            let control = stages.stage1[0].mean;
            let hypotheses = (1..=m)
                .map(|i| HypothesisResult {
                    rejected: outcome.is_rejected(i),
                    mean_difference: stages.stage1[i].mean - control,
                    stage1_only: false,
                })
                .collect();
            Ok(RejectionTableRow {
                n1: n,
                n2: 0,
                total1: n * (m + 1),
                total2: 0,
                sigma,
                global_rejected: global_rejected(&outcome, m)?,
                hypotheses,
                selected: None,
                stopped: StopReason::None,
                outcome,
            })
        })
        .collect()
}

/// Two-stage analysis for each `(n1, n2)`: stage one on the first `n1`
/// subjects of every arm, selection by the template's rule, stage two on the
/// next `n2` subjects of the control and the selected arms.
///
/// `template` supplies `m`, α, the boundaries and the selection rule; its
/// group sizes are replaced row by row (with matching Jenkins weights).
/// σ is re-estimated at each analysis from all data used so far.
pub fn two_stage_table(
    cohort: &Cohort,
    sizes: &[(usize, usize)],
    template: &TrialDesign,
) -> Result<Vec<RejectionTableRow>> {
    let m = cohort.m();
    if template.m() != m {
        return Err(Error::Input(format!("design has m = {}, data has {m} active arms", template.m())));
    }
    let rule = QuadratureRule::standard();
    sizes
        .iter()
        .map(|&(n1, n2)| {
            let design = template.resized(n1, n2)?;
            let first = nested_prefix(cohort, n1, 0, None)?;
            let sigma1 = pooled_sigma(cohort, &vec![n1; m + 1])?;
            let interim = Interim::analyze(&z_statistics(&first.stage1, sigma1)?, &design, rule)?;
            let selected = interim.selected();
            let control1 = first.stage1[0].mean;
            if !interim.continues() {
                let stopped = interim.stop();
                let outcome = interim.complete(None, rule)?;
                let decision = outcome.decision().clone();
                return Ok(RejectionTableRow {
                    n1,
                    n2,
                    total1: n1 * (m + 1),
                    total2: 0,
                    sigma: sigma1,
                    global_rejected: global_rejected(&decision, m)?,
                    hypotheses: (1..=m)
                        .map(|i| HypothesisResult {
                            rejected: decision.is_rejected(i),
                            mean_difference: first.stage1[i].mean - control1,
                            stage1_only: true,
                        })
                        .collect(),
                    selected: None,
                    stopped,
                    outcome: decision,
                });
            }
            let both = nested_prefix(cohort, n1, n2, Some(&selected))?;
            let mut up_to = vec![n1; m + 1];
            up_to[0] = n1 + n2;
            for arm in selected.arms() {
                up_to[arm] = n1 + n2;
            }
            let sigma2 = pooled_sigma(cohort, &up_to)?;
            let z2 = z_statistics(&both.stage2, sigma2)?;
            let outcome = interim.complete(Some(&z2), rule)?;
            let decision = outcome.decision().clone();
            let control_all = cohort.segment_mean(0, 0, n1 + n2)?;
            let hypotheses = (1..=m)
                .map(|i| -> Result<HypothesisResult> {
                    let kept = selected.contains(i);
                    let diff = if kept {
                        cohort.segment_mean(i, 0, n1 + n2)? - control_all
                    } else {
                        first.stage1[i].mean - control1
                    };
                    Ok(HypothesisResult { rejected: decision.is_rejected(i), mean_difference: diff, stage1_only: !kept })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(RejectionTableRow {
                n1,
                n2,
                total1: n1 * (m + 1),
                total2: n2 * (selected.len() + 1),
                sigma: sigma2,
                global_rejected: global_rejected(&decision, m)?,
                hypotheses,
                selected: Some(selected),
                stopped: StopReason::None,
                outcome: decision,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryPoint {
    pub size: usize,
    pub arm: String,
    pub mean: f64,
}

/// Running means of each arm at sizes `step, 2·step, …` and at the full arm size.
pub fn group_mean_trajectories(cohort: &Cohort, step: usize) -> Result<Vec<TrajectoryPoint>> {
    if step == 0 {
        return Err(Error::Config("trajectory step must be >= 1".into()));
    }
    let mut points = Vec::new();
    for arm in 0..=cohort.m() {
        let data = cohort.outcomes(arm);
        let mut sum = 0.0;
        for (k, y) in data.iter().enumerate() {
            sum += y;
            let size = k + 1;
            if size % step == 0 || size == data.len() {
                points.push(TrajectoryPoint { size, arm: cohort.labels()[arm].clone(), mean: sum / size as f64 });
            }
        }
    }
    Ok(points)
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Full-precision CSV of a rejection table.
pub fn write_table_csv<W: Write>(rows: &[RejectionTableRow], labels: &[String], out: W) -> Result<()> {
    let m = labels.len() - 1;
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> =
        ["n1", "n2", "N1", "N2", "sigma", "stopped", "global_rejected"].iter().map(|s| s.to_string()).collect();
    for label in &labels[1..] {
        header.push(format!("rejected_{label}"));
        header.push(format!("mean_diff_{label}"));
        header.push(format!("stage1_only_{label}"));
    }
    w.write_record(&header).map_err(csv_err)?;
    for row in rows {
        let mut rec = vec![
            row.n1.to_string(),
            row.n2.to_string(),
            row.total1.to_string(),
            row.total2.to_string(),
            row.sigma.to_string(),
            row.stopped.to_string(),
            row.global_rejected.to_string(),
        ];
        for h in row.hypotheses.iter().take(m) {
            rec.push(h.rejected.to_string());
            rec.push(h.mean_difference.to_string());
            rec.push(h.stage1_only.to_string());
        }
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trajectories_csv<W: Write>(points: &[TrajectoryPoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["size", "arm", "mean"]).map_err(csv_err)?;
    for p in points {
        w.write_record([p.size.to_string(), p.arm.clone(), p.mean.to_string()]).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Aligned plain-text table with cells like `Yes (60.67)`. A trailing `*`
/// marks a difference computed from stage-1 data only.
pub fn render_table(rows: &[RejectionTableRow], labels: &[String], decimals: usize) -> String {
    let two_stage = rows.iter().any(|r| r.n2 > 0);
    let mut header: Vec<String> = vec!["n1".into()];
    if two_stage {
        header.push("n2".into());
    }
    header.push("N1".into());
    if two_stage {
        header.push("N2".into());
    }
    header.push("global".into());
    header.extend(labels[1..].iter().map(|l| format!("H({l})")));

    let yes_no = |b: bool| if b { "Yes" } else { "No" };
    let mut body: Vec<Vec<String>> = Vec::new();
    for row in rows {
        let mut cells = vec![row.n1.to_string()];
        if two_stage {
            cells.push(row.n2.to_string());
        }
        cells.push(row.total1.to_string());
        if two_stage {
            cells.push(row.total2.to_string());
        }
        cells.push(yes_no(row.global_rejected).to_string());
        for h in &row.hypotheses {
            let mark = if h.stage1_only && two_stage { "*" } else { "" };
            cells.push(format!("{} ({:.*}){mark}", yes_no(h.rejected), decimals, h.mean_difference));
        }
        body.push(cells);
    }
    let widths: Vec<usize> = (0..header.len())
        .map(|c| body.iter().map(|r| r[c].len()).chain([header[c].len()]).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for line in std::iter::once(&header).chain(&body) {
        let cells: Vec<String> = line.iter().zip(&widths).map(|(s, w)| format!("{s:>w$}")).collect();
        let _ = writeln!(out, "{}", cells.join("  ").trim_end());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adaptive::SelectionRule;
    use crate::stats::RandomSource;

    fn synthetic(shifts: &[f64], n: usize, seed: u64) -> Cohort {
        let mut rng = RandomSource::new(seed, 0);
        let outcomes = shifts.iter().map(|s| (0..n).map(|_| s + rng.draw_std_normal()).collect()).collect();
        let labels = (0..shifts.len()).map(|i| format!("g{i}")).collect();
        Cohort::new(labels, outcomes).unwrap()
    }

    #[test]
    fn huge_separation_is_rejected() {
        // Data with an active arm ten standard deviations above control.
        let c = synthetic(&[0.0, 10.0], 20, 1);
        let rows = single_stage_table(&c, &[20], 0.025).unwrap();
        assert!(rows[0].hypotheses[0].rejected && rows[0].global_rejected);
        assert!((rows[0].hypotheses[0].mean_difference - 10.0).abs() < 1.0);
        assert_eq!(rows[0].total1, 40);
    }

    #[test]
    fn identical_arms_never_rejected() {
        let base: Vec<f64> = synthetic(&[0.0, 0.0], 40, 2).outcomes(0).to_vec();
        let c = Cohort::new(vec!["a".into(), "b".into(), "c".into()], vec![base.clone(), base.clone(), base]).unwrap();
        let rows = single_stage_table(&c, &[5, 10, 20, 40], 0.025).unwrap();
        for row in rows {
            assert!(!row.outcome.any_rejected());
            assert!(row.hypotheses.iter().all(|h| h.mean_difference == 0.0));
        }
    }

    #[test]
    fn prefix_rows_ignore_unused_suffix() {
        let c = synthetic(&[0.0, 0.5, 0.2], 30, 3);
        let mut shuffled: Vec<Vec<f64>> = (0..3).map(|a| c.outcomes(a).to_vec()).collect();
        for arm in shuffled.iter_mut() {
            arm[20..].reverse();
        }
        let d = Cohort::new(c.labels().to_vec(), shuffled).unwrap();
        assert_eq!(single_stage_table(&c, &[10, 20], 0.025).unwrap(), single_stage_table(&d, &[10, 20], 0.025).unwrap());
        let t = TrialDesign::new(2, 1, 1, 0.025, SelectionRule::FixedCount { s: 1 }).unwrap();
        assert_eq!(two_stage_table(&c, &[(8, 12)], &t).unwrap(), two_stage_table(&d, &[(8, 12)], &t).unwrap());
    }

    #[test]
    fn two_stage_rows() {
        let c = synthetic(&[0.0, 1.5, 0.0], 40, 4);
        let t = TrialDesign::new(2, 1, 1, 0.025, SelectionRule::FixedCount { s: 1 }).unwrap();
        let rows = two_stage_table(&c, &[(10, 15), (15, 25)], &t).unwrap();
        for row in &rows {
            assert_eq!(row.total1, row.n1 * 3);
            assert_eq!(row.total2, row.n2 * 2);
            assert_eq!(row.selected.unwrap().len(), 1);
            let dropped = (1..=2).find(|&i| !row.selected.unwrap().contains(i)).unwrap();
            assert!(row.hypotheses[dropped - 1].stage1_only);
            assert!(!row.hypotheses[dropped - 1].rejected);
            for (i, h) in row.hypotheses.iter().enumerate() {
                assert_eq!(h.rejected, row.outcome.is_rejected(i + 1));
            }
        }
        assert!(rows[1].hypotheses[0].rejected);
        // Selected arm difference uses both stages.
        let expected = c.segment_mean(1, 0, 40).unwrap() - c.segment_mean(0, 0, 40).unwrap();
        assert!((rows[1].hypotheses[0].mean_difference - expected).abs() < 1e-12);
        assert!(two_stage_table(&c, &[(30, 20)], &t).is_err());
    }

    #[test]
    fn early_stop_rows() {
        let c = synthetic(&[0.0, 3.0, 3.0], 40, 5);
        let t = TrialDesign::new(2, 1, 1, 0.025, SelectionRule::FixedCount { s: 1 })
            .unwrap()
            .with_boundaries(1.0, 0.01)
            .unwrap();
        let rows = two_stage_table(&c, &[(20, 20)], &t).unwrap();
        assert_eq!(rows[0].stopped, StopReason::Efficacy);
        assert_eq!(rows[0].total2, 0);
        assert!(rows[0].global_rejected);
    }

    #[test]
    fn trajectories() {
        let c = Cohort::new(vec!["c".into(), "a".into()], vec![vec![2.0; 7], vec![1.0, 3.0, 5.0, 7.0, 9.0]]).unwrap();
        let t = group_mean_trajectories(&c, 2).unwrap();
        let control: Vec<&TrajectoryPoint> = t.iter().filter(|p| p.arm == "c").collect();
        assert_eq!(control.iter().map(|p| p.size).collect::<Vec<_>>(), vec![2, 4, 6, 7]);
        assert!(control.iter().all(|p| p.mean == 2.0));
        let last = t.iter().rfind(|p| p.arm == "a").unwrap();
        assert_eq!((last.size, last.mean), (5, 5.0));
        assert!(group_mean_trajectories(&c, 0).is_err());
    }

    #[test]
    fn rendering() {
        let c = synthetic(&[0.0, 10.0, 0.0], 20, 6);
        let labels = c.labels().to_vec();
        let rows = single_stage_table(&c, &[10, 20], 0.025).unwrap();
        let text = render_table(&rows, &labels, 2);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].contains("H(g1)") && !lines[0].contains("n2"));
        assert!(lines[1].contains("Yes ("));
        let mut buf = Vec::new();
        write_table_csv(&rows, &labels, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("n1,n2,N1,N2,sigma,stopped,global_rejected,rejected_g1,mean_diff_g1"));
        assert_eq!(text.lines().count(), 3);
    }
}
