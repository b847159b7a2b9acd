//! Two-group log-normal salary world and the top-fraction selection study.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{AttributeSchema, Cell, DataError, Dataset, Role, Schema};
use crate::quantile::{fit_quantile_map, QuantileError};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
    #[error("selection quantile must lie in (0, 1), got {0}")]
    InvalidQuantile(f64),
    #[error("dataset needs a continuous label and a categorical protected attribute")]
    NotASalaryDataset,
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Quantile(#[from] QuantileError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupDistribution {
    pub name: String,
    pub log_mean: f64,
    pub log_sd: f64,
    pub proportion: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogNormalGroupSpec {
    pub groups: Vec<GroupDistribution>,
    pub n: usize,
    pub seed: u64,
}

impl LogNormalGroupSpec {
    /// W: higher median and tighter spread; V: lower median, wider spread.
    pub fn demo(n: usize, seed: u64) -> Self {
        Self {
            groups: vec![
                GroupDistribution {
                    name: "W".into(),
                    log_mean: 10.4,
                    log_sd: 0.25,
                    proportion: 0.5,
                },
                GroupDistribution {
                    name: "V".into(),
                    log_mean: 10.2,
                    log_sd: 0.6,
                    proportion: 0.5,
                },
            ],
            n,
            seed,
        }
    }

    /// Rows per group: rounded proportions, the last group taking the remainder.
    pub fn group_counts(&self) -> Vec<usize> {
        let k = self.groups.len().saturating_sub(1);
        let mut counts: Vec<usize> = self.groups[..k]
            .iter()
            .map(|g| (g.proportion * self.n as f64).round() as usize)
            .collect();
        counts.push(self.n.saturating_sub(counts.iter().sum()));
        counts
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        if self.groups.len() < 2 {
            return Err(SynthError::InvalidSpec("need at least two groups".into()));
        }
        for g in &self.groups {
            if !(g.log_sd > 0.0) || !g.log_sd.is_finite() || !g.log_mean.is_finite() {
                return Err(SynthError::InvalidSpec(format!(
                    "{}: bad log-normal parameters",
                    g.name
                )));
            }
            if !(g.proportion > 0.0) {
                return Err(SynthError::InvalidSpec(format!(
                    "{}: proportion must be positive",
                    g.name
                )));
            }
        }
        let total: f64 = self.groups.iter().map(|g| g.proportion).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(SynthError::InvalidSpec(format!("proportions sum to {total}")));
        }
        if self.group_counts().iter().any(|&c| c < 2) {
            return Err(SynthError::InvalidSpec("every group needs at least two rows".into()));
        }
        Ok(())
    }
}

pub fn salary_schema(group_names: &[&str]) -> Result<Schema, DataError> {
    Schema::new(vec![
        AttributeSchema::continuous("salary", Role::Label),
        AttributeSchema::categorical("group", group_names, Role::Protected),
    ])
}

/// Samples `(salary, group)` rows, grouped in spec order.
pub fn generate(spec: &LogNormalGroupSpec) -> Result<Dataset, SynthError> {
    spec.validate()?;
    let names: Vec<&str> = spec.groups.iter().map(|g| g.name.as_str()).collect();
    let schema = salary_schema(&names)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut rows = Vec::with_capacity(spec.n);
    for (gi, (g, count)) in spec.groups.iter().zip(spec.group_counts()).enumerate() {
        let dist = LogNormal::new(g.log_mean, g.log_sd).map_err(|e| SynthError::InvalidSpec(e.to_string()))?;
        for _ in 0..count {
            rows.push(vec![Cell::Real(dist.sample(&mut rng)), Cell::Level(gi)]);
        }
    }
    Ok(Dataset::from_rows(schema, &rows)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RepairMode {
    None,
    MeanSubtraction,
    PercentileEquivalence,
}

impl RepairMode {
    pub const ALL: [RepairMode; 3] = [
        RepairMode::None,
        RepairMode::MeanSubtraction,
        RepairMode::PercentileEquivalence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RepairMode::None => "none",
            RepairMode::MeanSubtraction => "mean_subtraction",
            RepairMode::PercentileEquivalence => "percentile_equivalence",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionOutcome {
    pub mode: RepairMode,
    pub selection_quantile: f64,
    pub repaired: Vec<f64>,
    pub selected: Vec<bool>,
    /// Each group's share of the selected rows.
    pub shares: Vec<f64>,
    /// Each group's share of all rows.
    pub proportions: Vec<f64>,
}

fn salary_columns(ds: &Dataset) -> Result<(Vec<f64>, Vec<usize>, usize), SynthError> {
    let schema = ds.schema();
    let salary = ds.numeric_column(schema.label()).ok_or(SynthError::NotASalaryDataset)?;
    let n_groups = schema
        .attribute(schema.protected())
        .kind
        .domain_size()
        .ok_or(SynthError::NotASalaryDataset)?;
    Ok((salary, ds.protected_levels(), n_groups))
}

/// Repairs salaries, keeps the top `ceil(n (1 - q))` rows (ties to the lower
/// row index) and reports group shares among them.
pub fn selection_study(
    ds: &Dataset,
    mode: RepairMode,
    selection_quantile: f64,
) -> Result<SelectionOutcome, SynthError> {
    if !(selection_quantile > 0.0 && selection_quantile < 1.0) {
        return Err(SynthError::InvalidQuantile(selection_quantile));
    }
    let (salary, groups, n_groups) = salary_columns(ds)?;
    let n = salary.len();
    let mut sizes = vec![0usize; n_groups];
    for &g in &groups {
        sizes[g] += 1;
    }
    let repaired = match mode {
        RepairMode::None => salary.clone(),
        RepairMode::MeanSubtraction => {
            let mut sums = vec![0.0; n_groups];
            for (&s, &g) in salary.iter().zip(&groups) {
                sums[g] += s;
            }
            salary
                .iter()
                .zip(&groups)
                .map(|(&s, &g)| s - sums[g] / sizes[g] as f64)
                .collect()
        }
        RepairMode::PercentileEquivalence => {
            fit_quantile_map(&salary, &groups, n_groups)?.apply_all(&salary, &groups)?
        }
    };
    let k = (((1.0 - selection_quantile) * n as f64) - 1e-9).ceil().max(1.0) as usize;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| repaired[b].total_cmp(&repaired[a]).then(a.cmp(&b)));
    let mut selected = vec![false; n];
    let mut hits = vec![0usize; n_groups];
    for &i in &order[..k] {
        selected[i] = true;
        hits[groups[i]] += 1;
    }
    Ok(SelectionOutcome {
        mode,
        selection_quantile,
        repaired,
        selected,
        shares: hits.iter().map(|&h| h as f64 / k as f64).collect(),
        proportions: sizes.iter().map(|&s| s as f64 / n as f64).collect(),
    })
}

/// `salary,group,repaired_salary,selected` with a header row.
pub fn write_study_csv<W: std::io::Write>(
    ds: &Dataset,
    outcome: &SelectionOutcome,
    writer: W,
) -> Result<(), SynthError> {
    let (salary, groups, _) = salary_columns(ds)?;
    let names = ds.level_names(ds.schema().protected());
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["salary", "group", "repaired_salary", "selected"])?;
    for i in 0..salary.len() {
        w.write_record([
            salary[i].to_string(),
            names[groups[i]].clone(),
            outcome.repaired[i].to_string(),
            outcome.selected[i].to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeShares {
    pub shares: BTreeMap<String, f64>,
    pub deviation_from_proportion: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemoSummary {
    pub spec: LogNormalGroupSpec,
    pub selection_quantile: f64,
    pub proportions: BTreeMap<String, f64>,
    pub modes: BTreeMap<String, ModeShares>,
}

impl DemoSummary {
    pub fn new(spec: &LogNormalGroupSpec, outcomes: &[SelectionOutcome]) -> Self {
        let name = |g: usize| spec.groups[g].name.clone();
        let proportions = outcomes
            .first()
            .map(|o| o.proportions.iter().enumerate().map(|(g, &p)| (name(g), p)).collect())
            .unwrap_or_default();
        let modes = outcomes
            .iter()
            .map(|o| {
                let shares = o.shares.iter().enumerate().map(|(g, &s)| (name(g), s)).collect();
                let deviation = o
                    .shares
                    .iter()
                    .zip(&o.proportions)
                    .enumerate()
                    .map(|(g, (s, p))| (name(g), s - p))
                    .collect();
                (
                    o.mode.name().to_string(),
                    ModeShares {
                        shares,
                        deviation_from_proportion: deviation,
                    },
                )
            })
            .collect();
        Self {
            spec: spec.clone(),
            selection_quantile: outcomes.first().map_or(0.0, |o| o.selection_quantile),
            proportions,
            modes,
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }
}
