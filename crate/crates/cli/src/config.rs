//! JSON run configurations. Unknown keys are rejected; every numeric field is
//! checked before any work starts.

use std::path::{Path, PathBuf};

use adaptrial_core::adaptive::{SelectionRule, TrialDesign, Weights};
use adaptrial_core::sim::{DesignSpec, EffectShape, GridPoint, SweepSettings};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_REPLICATIONS: u64 = 100_000;
pub const DEFAULT_SEED: u64 = 20_240_601;

fn invalid(field: &str, message: impl std::fmt::Display) -> CliError {
    CliError::Invalid(format!("{field}: {message}"))
}

fn default_alpha() -> f64 {
    0.025
}

fn default_alpha0() -> f64 {
    1.0
}

fn default_sigma() -> f64 {
    1.0
}

fn check_schema(version: u32) -> Result<(), CliError> {
    if version != SCHEMA_VERSION {
        return Err(invalid("schema_version", format!("expected {SCHEMA_VERSION}, got {version}")));
    }
    Ok(())
}

fn check_probability_open(field: &str, v: f64) -> Result<(), CliError> {
    if !(v > 0.0 && v < 1.0) {
        return Err(invalid(field, format!("must be in (0, 1), got {v}")));
    }
    Ok(())
}

fn check_boundaries(alpha: f64, alpha0: f64, alpha1: f64) -> Result<(), CliError> {
    if !(0.0..=1.0).contains(&alpha1) {
        return Err(invalid("alpha1", format!("must be in [0, 1], got {alpha1}")));
    }
    if !(0.0..=1.0).contains(&alpha0) {
        return Err(invalid("alpha0", format!("must be in [0, 1], got {alpha0}")));
    }
    if alpha1 > alpha {
        return Err(invalid("alpha1", format!("{alpha1} exceeds alpha = {alpha}")));
    }
    if alpha > alpha0 {
        return Err(invalid("alpha0", format!("{alpha0} is below alpha = {alpha}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ShapeConfig {
    Linear {},
    Clustered { eta: f64 },
}

impl ShapeConfig {
    fn validate(&self, field: &str) -> Result<EffectShape, CliError> {
        match *self {
            ShapeConfig::Linear {} => Ok(EffectShape::Linear),
            ShapeConfig::Clustered { eta } if eta >= 0.0 && eta.is_finite() => Ok(EffectShape::Clustered { eta }),
            ShapeConfig::Clustered { eta } => Err(invalid(&format!("{field}.eta"), format!("must be >= 0, got {eta}"))),
        }
    }
}

/// Exactly one of `s` (fixed count) or `epsilon`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectionConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
}

impl SelectionConfig {
    fn validate(&self, field: &str, m: usize) -> Result<SelectionRule, CliError> {
        let rule = match (self.s, self.epsilon) {
            (Some(s), None) => SelectionRule::FixedCount { s },
            (None, Some(epsilon)) => SelectionRule::Epsilon { epsilon },
            _ => return Err(invalid(field, "give exactly one of \"s\" or \"epsilon\"")),
        };
        rule.validate(m).map_err(|e| invalid(field, e))?;
        Ok(rule)
    }
}

/// Two-stage designs of one selection rule at several stage-1 ratios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    pub r: Vec<f64>,
}

impl DesignConfig {
    fn selection(&self) -> SelectionConfig {
        SelectionConfig { s: self.s, epsilon: self.epsilon }
    }
}

fn check_ratios(field: &str, ratios: &[f64]) -> Result<(), CliError> {
    if ratios.is_empty() {
        return Err(invalid(field, "must not be empty"));
    }
    if let Some(r) = ratios.iter().find(|r| !r.is_finite()) {
        return Err(invalid(field, format!("ratios must be finite, got {r}")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerConfig {
    pub schema_version: u32,
    pub m: usize,
    pub budget: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_alpha0")]
    pub alpha0: f64,
    #[serde(default)]
    pub alpha1: f64,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replications: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub shapes: Vec<ShapeConfig>,
    pub deltas: Vec<f64>,
    #[serde(default)]
    pub designs: Vec<DesignConfig>,
    /// Adds a single-stage comparator with `floor(budget/(m+1))` per group.
    #[serde(default)]
    pub single_stage: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

#[allow(clippy::too_many_arguments)]
fn sweep_settings(
    m: usize,
    budget: usize,
    alpha: f64,
    alpha0: f64,
    alpha1: f64,
    sigma: f64,
    replications: Option<u64>,
    seed: Option<u64>,
) -> Result<SweepSettings, CliError> {
    if m == 0 || m > adaptrial_core::closed_testing::MAX_FAMILY {
        return Err(invalid("m", format!("must be in 1..={}, got {m}", adaptrial_core::closed_testing::MAX_FAMILY)));
    }
    if budget == 0 {
        return Err(invalid("budget", "must be >= 1"));
    }
    check_probability_open("alpha", alpha)?;
    check_boundaries(alpha, alpha0, alpha1)?;
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(invalid("sigma", format!("must be positive, got {sigma}")));
    }
    let replications = replications.unwrap_or(DEFAULT_REPLICATIONS);
    if replications == 0 {
        return Err(invalid("replications", "must be >= 1"));
    }
    let mut s = SweepSettings::new(m, budget, alpha, replications, seed.unwrap_or(DEFAULT_SEED));
    s.alpha0 = alpha0;
    s.alpha1 = alpha1;
    s.sigma = sigma;
    Ok(s)
}

impl PowerConfig {
    /// Grid in output order: per shape, every design and ratio across the
    /// deltas, then the single-stage comparator.
    pub fn validate(&self) -> Result<(SweepSettings, Vec<GridPoint>), CliError> {
        check_schema(self.schema_version)?;
        let settings = sweep_settings(
            self.m, self.budget, self.alpha, self.alpha0, self.alpha1, self.sigma, self.replications, self.seed,
        )?;
        if self.shapes.is_empty() {
            return Err(invalid("shapes", "must not be empty"));
        }
        if self.deltas.is_empty() {
            return Err(invalid("deltas", "must not be empty"));
        }
        if let Some(d) = self.deltas.iter().find(|d| !d.is_finite()) {
            return Err(invalid("deltas", format!("must be finite, got {d}")));
        }
        if self.designs.is_empty() && !self.single_stage {
            return Err(invalid("designs", "must not be empty unless single_stage is true"));
        }
        let mut rules = Vec::new();
        for (k, d) in self.designs.iter().enumerate() {
            let field = format!("designs[{k}]");
            rules.push(d.selection().validate(&field, self.m)?);
            check_ratios(&format!("{field}.r"), &d.r)?;
        }
        let mut grid = Vec::new();
        for (k, shape) in self.shapes.iter().enumerate() {
            let shape = shape.validate(&format!("shapes[{k}]"))?;
            for (d, &selection) in self.designs.iter().zip(&rules) {
                for &ratio in &d.r {
                    for &delta in &self.deltas {
                        grid.push(GridPoint { shape, delta, design: DesignSpec::TwoStage { selection, ratio } });
                    }
                }
            }
            if self.single_stage {
                for &delta in &self.deltas {
                    grid.push(GridPoint { shape, delta, design: DesignSpec::SingleStage });
                }
            }
        }
        Ok((settings, grid))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectionProbsConfig {
    pub schema_version: u32,
    pub m: usize,
    pub budget: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_alpha0")]
    pub alpha0: f64,
    #[serde(default)]
    pub alpha1: f64,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replications: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub shape: ShapeConfig,
    pub delta: f64,
    pub selection: SelectionConfig,
    pub ratios: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

/// Validated selection-probability sweep.
#[derive(Debug)]
pub struct SelectionPlan {
    pub settings: SweepSettings,
    pub shape: EffectShape,
    pub delta: f64,
    pub selection: SelectionRule,
    pub ratios: Vec<f64>,
}

impl SelectionProbsConfig {
    pub fn validate(&self) -> Result<SelectionPlan, CliError> {
        check_schema(self.schema_version)?;
        let settings = sweep_settings(
            self.m, self.budget, self.alpha, self.alpha0, self.alpha1, self.sigma, self.replications, self.seed,
        )?;
        if !self.delta.is_finite() {
            return Err(invalid("delta", format!("must be finite, got {}", self.delta)));
        }
        check_ratios("ratios", &self.ratios)?;
        Ok(SelectionPlan {
            settings,
            shape: self.shape.validate("shape")?,
            delta: self.delta,
            selection: self.selection.validate("selection", self.m)?,
            ratios: self.ratios.clone(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColumnsConfig {
    pub arm: String,
    pub outcome: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArmsConfig {
    pub control: String,
    pub active: Vec<String>,
    #[serde(default)]
    pub ignore: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnalysisMode {
    Single,
    TwoStage,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyzeConfig {
    pub schema_version: u32,
    /// Relative paths are resolved against the config file's directory.
    pub dataset: PathBuf,
    pub columns: ColumnsConfig,
    pub arms: ArmsConfig,
    pub mode: AnalysisMode,
    /// Group sizes for `single` mode.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sizes: Vec<usize>,
    /// `(n1, n2)` pairs for `two-stage` mode.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub stage_sizes: Vec<(usize, usize)>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_alpha0")]
    pub alpha0: f64,
    #[serde(default)]
    pub alpha1: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub selection: Option<SelectionConfig>,
    #[serde(default = "default_decimals")]
    pub decimals: usize,
    #[serde(default = "default_step")]
    pub trajectory_step: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

fn default_decimals() -> usize {
    2
}

fn default_step() -> usize {
    1
}

#[derive(Debug)]
pub enum AnalysisPlan {
    Single { sizes: Vec<usize>, alpha: f64 },
    TwoStage { sizes: Vec<(usize, usize)>, template: TrialDesign },
}

impl AnalyzeConfig {
    pub fn resolve_dataset(&mut self, config_dir: Option<&Path>) {
        if let Some(dir) = config_dir {
            if self.dataset.is_relative() {
                self.dataset = dir.join(&self.dataset);
            }
        }
    }

    pub fn validate(&self) -> Result<AnalysisPlan, CliError> {
        check_schema(self.schema_version)?;
        check_probability_open("alpha", self.alpha)?;
        check_boundaries(self.alpha, self.alpha0, self.alpha1)?;
        if self.arms.active.is_empty() {
            return Err(invalid("arms.active", "must not be empty"));
        }
        if self.trajectory_step == 0 {
            return Err(invalid("trajectory_step", "must be >= 1"));
        }
        if self.decimals > 12 {
            return Err(invalid("decimals", format!("must be <= 12, got {}", self.decimals)));
        }
        let m = self.arms.active.len();
        match self.mode {
            AnalysisMode::Single => {
                if self.sizes.is_empty() {
                    return Err(invalid("sizes", "must not be empty in single mode"));
                }
                if !self.stage_sizes.is_empty() {
                    return Err(invalid("stage_sizes", "only allowed in two-stage mode"));
                }
                if self.sizes.contains(&0) {
                    return Err(invalid("sizes", "group sizes must be >= 1"));
                }
                Ok(AnalysisPlan::Single { sizes: self.sizes.clone(), alpha: self.alpha })
            }
            AnalysisMode::TwoStage => {
                if self.stage_sizes.is_empty() {
                    return Err(invalid("stage_sizes", "must not be empty in two-stage mode"));
                }
                if !self.sizes.is_empty() {
                    return Err(invalid("sizes", "only allowed in single mode"));
                }
                if self.stage_sizes.iter().any(|&(a, b)| a == 0 || b == 0) {
                    return Err(invalid("stage_sizes", "group sizes must be >= 1"));
                }
                let selection = self
                    .selection
                    .unwrap_or(SelectionConfig { s: Some(1), epsilon: None })
                    .validate("selection", m)?;
                let template = TrialDesign::new(m, 1, 1, self.alpha, selection)
                    .and_then(|d| d.with_boundaries(self.alpha0, self.alpha1))
                    .map_err(|e| invalid("design", e))?;
                Ok(AnalysisPlan::TwoStage { sizes: self.stage_sizes.clone(), template })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateConfig {
    pub schema_version: u32,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_alpha0")]
    pub alpha0: f64,
    #[serde(default)]
    pub alpha1: f64,
    /// Final critical value; defaults to `alpha`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    /// Explicit `[w1, w2]`; otherwise Jenkins weights of `n1`, `n2`, or equal weights.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<(f64, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n1: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n2: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug)]
pub struct ValidatePlan {
    pub alpha: f64,
    pub alpha0: f64,
    pub alpha1: f64,
    pub c: f64,
    pub weights: Weights,
    pub jenkins: Option<Weights>,
}

impl ValidateConfig {
    pub fn validate(&self) -> Result<ValidatePlan, CliError> {
        check_schema(self.schema_version)?;
        check_probability_open("alpha", self.alpha)?;
        check_boundaries(self.alpha, self.alpha0, self.alpha1)?;
        let c = self.c.unwrap_or(self.alpha);
        if !(0.0..=1.0).contains(&c) {
            return Err(invalid("c", format!("must be in [0, 1], got {c}")));
        }
        let jenkins = match (self.n1, self.n2) {
            (Some(n1), Some(n2)) => {
                Some(adaptrial_core::adaptive::jenkins_weights(n1, n2).map_err(|e| invalid("n1/n2", e))?)
            }
            (None, None) => None,
            _ => return Err(invalid("n1/n2", "give both or neither")),
        };
        let weights = match self.weights {
            Some((w1, w2)) => Weights::new(w1, w2).map_err(|e| invalid("weights", e))?,
            None => jenkins.unwrap_or_else(Weights::equal),
        };
        Ok(ValidatePlan { alpha: self.alpha, alpha0: self.alpha0, alpha1: self.alpha1, c, weights, jenkins })
    }
}

/// Reads and parses a JSON config. A metadata sidecar written next to an
/// artifact is accepted too; its embedded resolved config is used.
pub fn read_config<T: for<'de> Deserialize<'de>>(path: &Path, command: &str) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Invalid(format!("cannot read config {}: {e}", path.display())))?;
    let fail = |e: serde_json::Error| CliError::Invalid(format!("config {}: {e}", path.display()));
    let mut value: serde_json::Value = serde_json::from_str(&text).map_err(fail)?;
    if value.get("tool").and_then(|t| t.as_str()) == Some(crate::output::TOOL) {
        let recorded = value.get("command").and_then(|c| c.as_str()).unwrap_or_default();
        if recorded != command {
            return Err(CliError::Invalid(format!(
                "sidecar {} was written by `{recorded}`, not `{command}`",
                path.display()
            )));
        }
        value = value
            .get_mut("config")
            .map(serde_json::Value::take)
            .ok_or_else(|| CliError::Invalid(format!("sidecar {} has no config", path.display())))?;
    }
    serde_json::from_value(value).map_err(fail)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn power_json(extra: &str) -> String {
        format!(
            r#"{{"schema_version": 1, "m": 2, "budget": 100, "shapes": [{{"kind": "linear"}}],
               "deltas": [0.5], "designs": [{{"s": 1, "r": [0.33, 0.67]}}]{extra}}}"#
        )
    }

    #[test]
    fn power_config_roundtrip_and_grid() {
        let c: PowerConfig = serde_json::from_str(&power_json(r#", "single_stage": true"#)).unwrap();
        let (settings, grid) = c.validate().unwrap();
        assert_eq!(settings.replications, DEFAULT_REPLICATIONS);
        assert_eq!(grid.len(), 3);
        assert_eq!(grid[2].design, DesignSpec::SingleStage);
        let back: PowerConfig = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(serde_json::from_str::<PowerConfig>(&power_json(r#", "bogus": 1"#)).is_err());
        let bad = r#"{"schema_version": 1, "m": 2, "budget": 100, "shapes": [{"kind": "linear", "eta": 1}],
                      "deltas": [0.5], "single_stage": true}"#;
        assert!(serde_json::from_str::<PowerConfig>(bad).is_err());
    }

    #[test]
    fn field_level_messages() {
        let mut c: PowerConfig = serde_json::from_str(&power_json("")).unwrap();
        c.deltas.clear();
        assert!(c.validate().unwrap_err().to_string().contains("deltas"));
        let mut c: PowerConfig = serde_json::from_str(&power_json("")).unwrap();
        c.designs[0].s = Some(3);
        assert!(c.validate().unwrap_err().to_string().contains("designs[0]"));
        let mut c: PowerConfig = serde_json::from_str(&power_json("")).unwrap();
        c.schema_version = 2;
        assert!(c.validate().unwrap_err().to_string().contains("schema_version"));
        let mut c: PowerConfig = serde_json::from_str(&power_json("")).unwrap();
        c.alpha1 = 0.03;
        assert!(c.validate().unwrap_err().to_string().contains("alpha1"));
    }

    #[test]
    fn selection_needs_exactly_one_rule() {
        let both = SelectionConfig { s: Some(1), epsilon: Some(0.1) };
        assert!(both.validate("selection", 2).is_err());
        let none = SelectionConfig { s: None, epsilon: None };
        assert!(none.validate("selection", 2).is_err());
    }

    #[test]
    fn validate_config_weights() {
        let c: ValidateConfig = serde_json::from_str(r#"{"schema_version": 1, "n1": 25, "n2": 75}"#).unwrap();
        let plan = c.validate().unwrap();
        assert!((plan.weights.w1() - 0.5).abs() < 1e-15);
        assert_eq!(plan.c, 0.025);
        let c: ValidateConfig = serde_json::from_str(r#"{"schema_version": 1, "alpha1": 0.03}"#).unwrap();
        assert!(c.validate().unwrap_err().to_string().contains("alpha1"));
        let c: ValidateConfig = serde_json::from_str(r#"{"schema_version": 1, "n1": 25}"#).unwrap();
        assert!(c.validate().is_err());
    }

    #[test]
    fn analyze_mode_checks() {
        let base = r#"{"schema_version": 1, "dataset": "d.csv", "columns": {"arm": "g", "outcome": "y"},
                       "arms": {"control": "c", "active": ["a", "b"]}, "mode": "two-stage",
                       "stage_sizes": [[5, 7], [7, 9]]}"#;
        let mut c: AnalyzeConfig = serde_json::from_str(base).unwrap();
        assert!(matches!(c.validate().unwrap(), AnalysisPlan::TwoStage { .. }));
        c.mode = AnalysisMode::Single;
        assert!(c.validate().is_err());
        c.resolve_dataset(Some(Path::new("/data")));
        assert_eq!(c.dataset, PathBuf::from("/data/d.csv"));
    }
}
