use std::collections::{HashMap, HashSet};
use std::path::Path;

use crate::error::{Error, Result};

/// One subject's outcome as read from the input file.
#[derive(Debug, Clone, PartialEq)]
pub struct SubjectRecord {
    pub arm: String,
    pub outcome: f64,
    /// Position used for prefix analyses; the data row index unless an
    /// order column is mapped.
    pub order: u64,
}

/// Names of the input columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnMapping {
    pub arm: String,
    pub outcome: String,
    pub order: Option<String>,
}

/// Which arm labels are the control and the active arms (in analysis order),
/// and which labels present in the file are skipped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArmRoles {
    pub control: String,
    pub active: Vec<String>,
    pub ignore: Vec<String>,
}

impl ArmRoles {
    pub fn new(control: impl Into<String>, active: Vec<String>) -> Self {
        Self { control: control.into(), active, ignore: Vec::new() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.active.is_empty() {
            return Err(Error::Config("at least one active arm is required".into()));
        }
        let mut seen = HashSet::new();
        for label in std::iter::once(&self.control).chain(&self.active).chain(&self.ignore) {
            if label.is_empty() {
                return Err(Error::Config("arm labels must be non-empty".into()));
            }
            if !seen.insert(label.as_str()) {
                return Err(Error::Config(format!("arm label {label:?} is declared more than once")));
            }
        }
        Ok(())
    }

    /// Control first, then active arms.
    pub fn analysed(&self) -> impl Iterator<Item = &String> {
        std::iter::once(&self.control).chain(&self.active)
    }
}

/// Reads subjects of the control and active arms from a CSV file with a
/// header row. Row numbers in errors count data rows from 1.
pub fn load_subjects(path: &Path, mapping: &ColumnMapping, roles: &ArmRoles) -> Result<Vec<SubjectRecord>> {
    roles.validate()?;
    let fail = |message: String| Error::Load { path: path.to_path_buf(), message };
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| fail(e.to_string()))?;
    let headers = reader.headers().map_err(|e| fail(e.to_string()))?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| fail(format!("column {name:?} not found in header")))
    };
    let arm_col = column(&mapping.arm)?;
    let outcome_col = column(&mapping.outcome)?;
    let order_col = mapping.order.as_deref().map(column).transpose()?;

    let analysed: HashSet<&str> = roles.analysed().map(String::as_str).collect();
    let ignored: HashSet<&str> = roles.ignore.iter().map(String::as_str).collect();
    let mut seen_orders: HashMap<String, HashSet<u64>> = HashMap::new();
    let mut records = Vec::new();
    for (index, row) in reader.records().enumerate() {
        let row_no = index + 1;
        let row = row.map_err(|e| fail(format!("row {row_no}: {e}")))?;
        let field = |col: usize| row.get(col).unwrap_or("");
        let arm = field(arm_col);
        if ignored.contains(arm) {
            continue;
        }
        if !analysed.contains(arm) {
            return Err(fail(format!("row {row_no}: unknown arm label {arm:?}")));
        }
        let raw = field(outcome_col);
        let outcome: f64 = raw
            .parse()
            .map_err(|_| fail(format!("row {row_no}: outcome {raw:?} is not a number")))?;
        if !outcome.is_finite() {
            return Err(fail(format!("row {row_no}: outcome {raw:?} is not finite")));
        }
        let order = match order_col {
            None => index as u64,
            Some(col) => {
                let raw = field(col);
                raw.parse()
                    .map_err(|_| fail(format!("row {row_no}: order {raw:?} is not a nonnegative integer")))?
            }
        };
        if !seen_orders.entry(arm.to_string()).or_default().insert(order) {
            return Err(fail(format!("row {row_no}: order {order} repeats within arm {arm:?}")));
        }
        records.push(SubjectRecord { arm: arm.to_string(), outcome, order });
    }
    Ok(records)
}
