//! Replication loop.
//!
//! Replication `r` draws from stream `r` of the run seed in a fixed layout:
//! `m + 1` standard normals for the stage-1 group means (control first),
//! then `m + 1` for stage two, of which only the control and the selected
//! arms are used. Results are integer counts, so the aggregate is the same
//! for any split of replications across threads.

use rayon::prelude::*;

use crate::adaptive::{Interim, StopReason, TrialDesign};
use crate::closed_testing::{closed_test, dunnett_local_pvalues, enumerate_subsets, HypothesisSubset};
use crate::dunnett::ZStatistics;
use crate::error::{Error, Result};
use crate::sim::EffectConfiguration;
use crate::stats::{QuadratureRule, RandomSource};

/// Monte Carlo proportion with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
}

impl Estimate {
    pub fn from_count(count: u64, replications: u64) -> Self {
        let p = count as f64 / replications as f64;
        Self { value: p, se: (p * (1.0 - p) / replications as f64).sqrt() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationSummary {
    pub replications: u64,
    /// At least one hypothesis rejected.
    pub power_any: Estimate,
    /// Every hypothesis rejected.
    pub power_all: Estimate,
    /// Entry `i-1` is the rejection rate of `Hᵢ`.
    pub power_per_hypothesis: Vec<Estimate>,
    /// Entry `i-1` is the rate at which arm `i` continues to stage two.
    /// Empty for single-stage designs.
    pub selection: Vec<Estimate>,
    pub stop_efficacy: Estimate,
    pub stop_futility: Estimate,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Tally {
    replications: u64,
    any: u64,
    all: u64,
    rejected: Vec<u64>,
    selected: Vec<u64>,
    efficacy: u64,
    futility: u64,
}

impl Tally {
    fn new(m: usize) -> Self {
        Self {
            replications: 0,
            any: 0,
            all: 0,
            rejected: vec![0; m],
            selected: vec![0; m],
            efficacy: 0,
            futility: 0,
        }
    }

    fn record(&mut self, rejected: &[bool]) {
        self.replications += 1;
        self.any += u64::from(rejected.iter().any(|&r| r));
        self.all += u64::from(rejected.iter().all(|&r| r));
        for (count, &r) in self.rejected.iter_mut().zip(rejected) {
            *count += u64::from(r);
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.replications += other.replications;
        self.any += other.any;
        self.all += other.all;
        for (a, b) in self.rejected.iter_mut().zip(other.rejected) {
            *a += b;
        }
        for (a, b) in self.selected.iter_mut().zip(other.selected) {
            *a += b;
        }
        self.efficacy += other.efficacy;
        self.futility += other.futility;
        self
    }

    fn summary(self, two_stage: bool) -> SimulationSummary {
        let r = self.replications;
        let est = |k: u64| Estimate::from_count(k, r);
        SimulationSummary {
            replications: r,
            power_any: est(self.any),
            power_all: est(self.all),
            power_per_hypothesis: self.rejected.iter().map(|&k| est(k)).collect(),
            selection: if two_stage { self.selected.iter().map(|&k| est(k)).collect() } else { Vec::new() },
            stop_efficacy: est(self.efficacy),
            stop_futility: est(self.futility),
        }
    }
}

/// Stage-wise z statistics for all arms from `m + 1` fresh group means.
fn draw_stage(rng: &mut RandomSource, config: &EffectConfiguration, n: usize) -> Vec<f64> {
    let sd = config.sigma() / (n as f64).sqrt();
    let means: Vec<f64> = config.means().iter().map(|mu| mu + sd * rng.draw_std_normal()).collect();
    let scale = config.sigma() * (2.0 / n as f64).sqrt();
    means[1..].iter().map(|x| (x - means[0]) / scale).collect()
}

fn check_replications(replications: u64) -> Result<()> {
    if replications == 0 {
        return Err(Error::Config("replications must be >= 1".into()));
    }
    Ok(())
}

fn run<F>(m: usize, replications: u64, two_stage: bool, trial: F) -> Result<SimulationSummary>
where
    F: Fn(u64, &mut Tally) -> Result<()> + Sync,
{
    let tally = (0..replications)
        .into_par_iter()
        .try_fold(
            || Tally::new(m),
            |mut t, r| {
                trial(r, &mut t)?;
                Ok::<_, Error>(t)
            },
        )
        .try_reduce(|| Tally::new(m), |a, b| Ok(a.merge(b)))?;
    Ok(tally.summary(two_stage))
}

/// Single-stage many-to-one design with `n` subjects per group, analysed by
/// the Dunnett closed test at `alpha`.
pub fn simulate_single_stage(
    config: &EffectConfiguration,
    n: usize,
    alpha: f64,
    replications: u64,
    seed: u64,
) -> Result<SimulationSummary> {
    check_replications(replications)?;
    if n == 0 {
        return Err(Error::Config("group size must be >= 1".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Config(format!("alpha must be in (0, 1), got {alpha}")));
    }
    let m = config.m();
    let subsets = enumerate_subsets(m)?;
    let rule = QuadratureRule::standard();
    run(m, replications, false, |r, tally| {
        let mut rng = RandomSource::new(seed, r);
        let z = ZStatistics::for_all_arms(draw_stage(&mut rng, config, n), n, config.sigma())?;
        let outcome = closed_test(dunnett_local_pvalues(&z, &subsets, rule)?, m, alpha)?;
        tally.record(outcome.rejected());
        Ok(())
    })
}

/// Two-stage design with selection at the interim.
pub fn simulate_two_stage(
    config: &EffectConfiguration,
    design: &TrialDesign,
    replications: u64,
    seed: u64,
) -> Result<SimulationSummary> {
    check_replications(replications)?;
    let m = design.m();
    if config.m() != m {
        return Err(Error::Config(format!(
            "effect configuration has {} active arms, design has m = {m}",
            config.m()
        )));
    }
    let rule = QuadratureRule::standard();
    let sigma = config.sigma();
    run(m, replications, true, |r, tally| {
        let mut rng = RandomSource::new(seed, r);
        let z1 = ZStatistics::for_all_arms(draw_stage(&mut rng, config, design.n1()), design.n1(), sigma)?;
        let z2_all = draw_stage(&mut rng, config, design.n2());
        let interim = Interim::analyze(&z1, design, rule)?;
        let selected: HypothesisSubset = interim.selected();
        let stage2 = if interim.continues() {
            let arms: Vec<usize> = selected.arms().collect();
            let values = arms.iter().map(|&a| z2_all[a - 1]).collect();
            Some(ZStatistics::new(arms, values, design.n2(), sigma)?)
        } else {
            None
        };
        let outcome = interim.complete(stage2.as_ref(), rule)?;
        match outcome.stopped_early() {
            StopReason::None => {
                for arm in selected.arms() {
                    tally.selected[arm - 1] += 1;
                }
            }
            StopReason::Efficacy => tally.efficacy += 1,
            StopReason::Futility => tally.futility += 1,
        }
        tally.record(outcome.decision().rejected());
        Ok(())
    })
}
