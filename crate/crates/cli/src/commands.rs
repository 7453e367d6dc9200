//! The four subcommands. Each validates its whole input (including loading
//! any dataset) before computing, and writes files only after every
//! computation has succeeded.

use std::path::PathBuf;

use adaptrial_core::adaptive::{combination_type1_error, Weights};
use adaptrial_core::dataset::{
    group_mean_trajectories, load_subjects, render_table, single_stage_table, two_stage_table, write_table_csv,
    write_trajectories_csv, ArmRoles, Cohort, ColumnMapping,
};
use adaptrial_core::sim::{power_sweep, selection_prob_sweep, write_sweep_csv, SweepRow};
use serde::Serialize;

use crate::config::{
    read_config, AnalysisPlan, AnalyzeConfig, PowerConfig, SelectionProbsConfig, ValidateConfig, DEFAULT_REPLICATIONS,
    DEFAULT_SEED,
};
use crate::error::CliError;
use crate::output::{check_file_name, Artifacts, Provenance};

/// Settings shared by every subcommand.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub config: PathBuf,
    pub seed: Option<u64>,
    pub replications: Option<u64>,
    pub out: PathBuf,
}

/// What a successful command produced.
#[derive(Debug)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
    /// Human-readable summary for stdout.
    pub summary: String,
}

fn with_comment(provenance: &Provenance, body: Vec<u8>) -> Vec<u8> {
    let mut out = provenance.comment_line().into_bytes();
    out.extend(body);
    out
}

fn sweep_bytes(rows: &[SweepRow], m: usize) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    write_sweep_csv(rows, m, &mut buf).map_err(|e| CliError::Runtime(e.to_string()))?;
    Ok(buf)
}

fn failed_rows(rows: &[SweepRow]) -> usize {
    rows.iter().filter(|r| r.outcome.is_err()).count()
}

pub fn power(opts: &RunOptions) -> Result<RunReport, CliError> {
    let mut config: PowerConfig = read_config(&opts.config, "power")?;
    config.seed = Some(opts.seed.or(config.seed).unwrap_or(DEFAULT_SEED));
    config.replications = Some(opts.replications.or(config.replications).unwrap_or(DEFAULT_REPLICATIONS));
    let name = config.output.get_or_insert_with(|| "power.csv".into()).clone();
    check_file_name("output", &name)?;
    let (settings, grid) = config.validate()?;
    let provenance = Provenance::new("power", settings.seed, &config)?;

    let rows = power_sweep(&grid, &settings).map_err(|e| CliError::Runtime(e.to_string()))?;
    let mut artifacts = Artifacts::default();
    artifacts.add(name, with_comment(&provenance, sweep_bytes(&rows, settings.m)?));
    let files = artifacts.write(&opts.out, &provenance)?;
    Ok(RunReport {
        files,
        summary: format!(
            "power: {} grid points ({} infeasible), {} replications each, seed {}",
            rows.len(),
            failed_rows(&rows),
            settings.replications,
            settings.seed
        ),
    })
}

pub fn selection_probs(opts: &RunOptions) -> Result<RunReport, CliError> {
    let mut config: SelectionProbsConfig = read_config(&opts.config, "selection-probs")?;
    config.seed = Some(opts.seed.or(config.seed).unwrap_or(DEFAULT_SEED));
    config.replications = Some(opts.replications.or(config.replications).unwrap_or(DEFAULT_REPLICATIONS));
    let name = config.output.get_or_insert_with(|| "selection_probs.csv".into()).clone();
    check_file_name("output", &name)?;
    let plan = config.validate()?;
    let provenance = Provenance::new("selection-probs", plan.settings.seed, &config)?;

    let rows = selection_prob_sweep(plan.shape, plan.delta, plan.selection, &plan.ratios, &plan.settings)
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    let mut artifacts = Artifacts::default();
    artifacts.add(name, with_comment(&provenance, sweep_bytes(&rows, plan.settings.m)?));
    let files = artifacts.write(&opts.out, &provenance)?;
    Ok(RunReport {
        files,
        summary: format!(
            "selection-probs: {} ratios ({} infeasible), {} replications each, seed {}",
            rows.len(),
            failed_rows(&rows),
            plan.settings.replications,
            plan.settings.seed
        ),
    })
}

pub fn analyze(opts: &RunOptions) -> Result<RunReport, CliError> {
    let mut config: AnalyzeConfig = read_config(&opts.config, "analyze")?;
    config.seed = Some(opts.seed.or(config.seed).unwrap_or(DEFAULT_SEED));
    let name = config.name.get_or_insert_with(|| "table".into()).clone();
    check_file_name("name", &name)?;
    config.resolve_dataset(opts.config.parent());
    config.dataset = std::fs::canonicalize(&config.dataset)
        .map_err(|e| CliError::Invalid(format!("dataset {}: {e}", config.dataset.display())))?;
    let plan = config.validate()?;

    let mapping = ColumnMapping {
        arm: config.columns.arm.clone(),
        outcome: config.columns.outcome.clone(),
        order: config.columns.order.clone(),
    };
    let roles = ArmRoles {
        control: config.arms.control.clone(),
        active: config.arms.active.clone(),
        ignore: config.arms.ignore.clone(),
    };
    let records = load_subjects(&config.dataset, &mapping, &roles)?;
    let cohort = Cohort::from_records(&records, &roles)?;
    let provenance = Provenance::new("analyze", config.seed.unwrap_or(DEFAULT_SEED), &config)?;

    let rows = match &plan {
        AnalysisPlan::Single { sizes, alpha } => single_stage_table(&cohort, sizes, *alpha)?,
        AnalysisPlan::TwoStage { sizes, template } => two_stage_table(&cohort, sizes, template)?,
    };
    let trajectories = group_mean_trajectories(&cohort, config.trajectory_step)?;

    let labels = cohort.labels();
    let mut table = Vec::new();
    write_table_csv(&rows, labels, &mut table)?;
    let mut traj = Vec::new();
    write_trajectories_csv(&trajectories, &mut traj)?;
    let text = render_table(&rows, labels, config.decimals);

    let mut artifacts = Artifacts::default();
    artifacts.add(format!("{name}.csv"), with_comment(&provenance, table));
    artifacts.add(format!("{name}.txt"), with_comment(&provenance, text.clone().into_bytes()));
    artifacts.add(format!("{name}_trajectories.csv"), with_comment(&provenance, traj));
    let files = artifacts.write(&opts.out, &provenance)?;
    Ok(RunReport { files, summary: text })
}

#[derive(Debug, Serialize)]
struct WeightPair {
    w1: f64,
    w2: f64,
}

impl From<Weights> for WeightPair {
    fn from(w: Weights) -> Self {
        Self { w1: w.w1(), w2: w.w2() }
    }
}

#[derive(Debug, Serialize)]
struct ValidateReport {
    alpha: f64,
    alpha0: f64,
    alpha1: f64,
    c: f64,
    weights: WeightPair,
    jenkins_weights: Option<WeightPair>,
    type1_error: f64,
    verdict: &'static str,
}

/// Slack allowed on the computed error rate before the verdict turns to FAIL.
const VERDICT_TOLERANCE: f64 = 1e-9;

pub fn validate(opts: &RunOptions) -> Result<RunReport, CliError> {
    let mut config: ValidateConfig = read_config(&opts.config, "validate")?;
    config.seed = Some(opts.seed.or(config.seed).unwrap_or(DEFAULT_SEED));
    let plan = config.validate()?;
    let provenance = Provenance::new("validate", config.seed.unwrap_or(DEFAULT_SEED), &config)?;

    let type1 = combination_type1_error(plan.alpha0, plan.alpha1, plan.c, plan.weights)?;
    let verdict = if type1 <= plan.alpha + VERDICT_TOLERANCE { "PASS" } else { "FAIL" };
    let report = ValidateReport {
        alpha: plan.alpha,
        alpha0: plan.alpha0,
        alpha1: plan.alpha1,
        c: plan.c,
        weights: plan.weights.into(),
        jenkins_weights: plan.jenkins.map(Into::into),
        type1_error: type1,
        verdict,
    };
    let mut json = serde_json::to_vec_pretty(&report).map_err(|e| CliError::Runtime(e.to_string()))?;
    json.push(b'\n');

    let mut summary = format!(
        "alpha1 = {}, alpha0 = {}, c = {}, weights = ({:.6}, {:.6})\ntype I error = {:.10}  {verdict}",
        plan.alpha1,
        plan.alpha0,
        plan.c,
        plan.weights.w1(),
        plan.weights.w2(),
        type1
    );
    if let Some(j) = plan.jenkins {
        summary.push_str(&format!("\njenkins weights for (n1, n2) = ({:.6}, {:.6})", j.w1(), j.w2()));
    }

    let mut artifacts = Artifacts::default();
    artifacts.add("validate.json", json);
    let files = artifacts.write(&opts.out, &provenance)?;
    Ok(RunReport { files, summary })
}

