//! End-to-end experiment recipes.

pub mod german;
pub mod law;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{DataError, Dataset, UnitScaler};
use crate::fair_adjust::FairError;
use crate::learn::LearnError;
use crate::matrix::Matrix;
use crate::metrics::{FairnessReport, GroupRoles, MetricError};
use crate::models::ModelError;
use crate::quantile::QuantileError;

pub use german::{
    dependency_partition, fit_adjustment, german_credit, german_schema, run_classifier, run_german_credit,
    ClassifierRun, GermanCreditConfig, GermanCreditReport, PartitionSummary,
};
pub use law::{
    generate_law_mirror, run_law_school, run_regression, LawMirrorSpec, LawSchoolConfig, LawSchoolReport, RegressionRun,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Learn(#[from] LearnError),
    #[error(transparent)]
    Fair(#[from] FairError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Quantile(#[from] QuantileError),
}

/// Which version of the training data a model sees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Every attribute, protected included.
    Unfair,
    /// Protected attribute removed.
    Unaware,
    /// Dependent attributes shifted by their protected-level contribution.
    Technique1,
    /// Trained on attributes centered by the prior-weighted contribution,
    /// evaluated on technique-1 data.
    Technique2,
    /// Per-group percentile repair onto the pooled distribution.
    Quantile,
}

impl Variant {
    pub const ADJUSTMENTS: [Variant; 4] = [
        Variant::Unfair,
        Variant::Unaware,
        Variant::Technique1,
        Variant::Technique2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Unfair => "unfair",
            Variant::Unaware => "unaware",
            Variant::Technique1 => "technique1",
            Variant::Technique2 => "technique2",
            Variant::Quantile => "quantile",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            Variant::Unfair,
            Variant::Unaware,
            Variant::Technique1,
            Variant::Technique2,
            Variant::Quantile,
        ]
        .into_iter()
        .find(|v| v.name() == s)
    }
}

/// Protected-level roles: the named levels if present, else levels 0 and 1.
pub fn roles_by_name(ds: &Dataset, a: &str, b: &str) -> GroupRoles {
    let names = ds.level_names(ds.schema().protected());
    let find = |n: &str| names.iter().position(|x| x == n);
    match (find(a), find(b)) {
        (Some(a), Some(b)) => GroupRoles::new(a, b),
        _ => GroupRoles::new(0, 1),
    }
}

/// Fold-averaged headline numbers plus the per-fold reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossValidated {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_squared_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub disparate_classification_impact: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probabilistic_disparate_impact: Option<f64>,
    pub demographic_parity_gap: f64,
    /// Mean over the folds where the gap is defined.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub equality_of_opportunity_gap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub underestimation_by_quartile: Option<[f64; 4]>,
    pub folds: Vec<FairnessReport>,
}

fn mean_of(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let v: Vec<f64> = values.flatten().collect();
    if v.is_empty() {
        None
    } else {
        Some(v.iter().sum::<f64>() / v.len() as f64)
    }
}

impl CrossValidated {
    pub fn from_folds(folds: Vec<FairnessReport>) -> Self {
        let under = if folds.iter().all(|f| f.underestimation_by_quartile.is_some()) && !folds.is_empty() {
            let mut acc = [0.0; 4];
            for f in &folds {
                for (a, v) in acc.iter_mut().zip(f.underestimation_by_quartile.unwrap()) {
                    *a += v / folds.len() as f64;
                }
            }
            Some(acc)
        } else {
            None
        };
        Self {
            accuracy: mean_of(folds.iter().map(|f| f.accuracy)),
            mean_squared_error: mean_of(folds.iter().map(|f| f.mean_squared_error)),
            disparate_classification_impact: mean_of(folds.iter().map(|f| f.disparate_classification_impact)),
            probabilistic_disparate_impact: mean_of(folds.iter().map(|f| f.probabilistic_disparate_impact)),
            demographic_parity_gap: mean_of(folds.iter().map(|f| Some(f.demographic_parity_gap))).unwrap_or(0.0),
            equality_of_opportunity_gap: mean_of(folds.iter().map(|f| f.equality_of_opportunity_gap)),
            underestimation_by_quartile: under,
            folds,
        }
    }
}

/// Unit-interval scaling fit on `train_rows` of `train`; `eval` is scaled with
/// the same ranges.
fn scaled_pair(train: &Matrix, train_rows: &[usize], eval: &Matrix, eval_rows: &[usize]) -> (Matrix, Matrix) {
    let scaler = UnitScaler::fit(train, train_rows);
    (
        scaler.transform(&train.select_rows(train_rows)),
        scaler.transform(&eval.select_rows(eval_rows)),
    )
}
