//! Classifiers and a regressor trained from scratch on dense matrices.
//!
//! Class labels are `0`/`1` everywhere; the SVM maps them to `-1`/`+1`
//! internally.

pub mod gnb;
pub mod linreg;
pub mod logistic;
pub mod svm;

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use gnb::GnbModel;
pub use linreg::LinearRegressionModel;
pub use logistic::{LogisticConfig, LogisticModel};
pub use svm::{SvmConfig, SvmModel};

use crate::matrix::Matrix;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("labels must be 0 or 1")]
    NonBinaryLabels,
    #[error("expected {expected} features, got {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("class {0} has no training samples")]
    MissingClass(usize),
    #[error("{rows} rows but {labels} labels")]
    LengthMismatch { rows: usize, labels: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("json: {0}")]
    Json(String),
}

pub(crate) fn check_training(x: &Matrix, y_len: usize) -> Result<(), ModelError> {
    if x.rows() != y_len {
        return Err(ModelError::LengthMismatch {
            rows: x.rows(),
            labels: y_len,
        });
    }
    if x.rows() == 0 {
        return Err(ModelError::InvalidParameter("no training rows".into()));
    }
    if x.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(ModelError::Numerical("non-finite feature value".into()));
    }
    Ok(())
}

pub(crate) fn check_labels(y: &[usize]) -> Result<(), ModelError> {
    if y.iter().any(|&l| l > 1) {
        return Err(ModelError::NonBinaryLabels);
    }
    Ok(())
}

pub(crate) fn check_arity(x: &Matrix, expected: usize) -> Result<(), ModelError> {
    if x.cols() != expected {
        return Err(ModelError::ArityMismatch {
            expected,
            found: x.cols(),
        });
    }
    Ok(())
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// The three classifiers behind one interface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    Logistic,
    NaiveBayes,
    Svm,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 3] = [
        ClassifierKind::Logistic,
        ClassifierKind::NaiveBayes,
        ClassifierKind::Svm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ClassifierKind::Logistic => "logistic",
            ClassifierKind::NaiveBayes => "naive_bayes",
            ClassifierKind::Svm => "svm",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "logistic" | "logreg" => Some(ClassifierKind::Logistic),
            "naive_bayes" | "gnb" | "nb" => Some(ClassifierKind::NaiveBayes),
            "svm" => Some(ClassifierKind::Svm),
            _ => None,
        }
    }
}

/// Hyperparameters for every classifier kind.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ClassifierParams {
    pub logistic: LogisticConfig,
    pub svm: SvmConfig,
}

/// A trained model of any kind, persisted with a `"kind"` tag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrainedModel {
    Logistic(LogisticModel),
    NaiveBayes(GnbModel),
    Svm(SvmModel),
    LinearRegression(LinearRegressionModel),
}

impl TrainedModel {
    pub fn train(kind: ClassifierKind, x: &Matrix, y: &[usize], params: &ClassifierParams) -> Result<Self, ModelError> {
        Ok(match kind {
            ClassifierKind::Logistic => TrainedModel::Logistic(LogisticModel::fit(x, y, &params.logistic)?),
            ClassifierKind::NaiveBayes => TrainedModel::NaiveBayes(GnbModel::fit(x, y)?),
            ClassifierKind::Svm => TrainedModel::Svm(SvmModel::fit(x, y, &params.svm)?),
        })
    }

    /// Probability of class 1 per row; for linear regression, the raw prediction.
    pub fn predict_scores(&self, x: &Matrix) -> Result<Vec<f64>, ModelError> {
        match self {
            TrainedModel::Logistic(m) => m.predict_proba(x),
            TrainedModel::NaiveBayes(m) => m.predict_proba(x),
            TrainedModel::Svm(m) => m.predict_proba(x),
            TrainedModel::LinearRegression(m) => m.predict(x),
        }
    }

    /// Hard class per row (classifiers only).
    pub fn predict_classes(&self, x: &Matrix) -> Result<Vec<usize>, ModelError> {
        match self {
            TrainedModel::Logistic(m) => m.predict(x),
            TrainedModel::NaiveBayes(m) => m.predict(x),
            TrainedModel::Svm(m) => m.predict(x),
            TrainedModel::LinearRegression(_) => {
                Err(ModelError::InvalidParameter("linear regression has no classes".into()))
            }
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(self).expect("model serializes")
    }

    pub fn from_json_str(text: &str) -> Result<Self, ModelError> {
        serde_json::from_str(text).map_err(|e| ModelError::Json(e.to_string()))
    }

    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.to_json_string())
    }

    pub fn load(path: &Path) -> Result<Self, ModelError> {
        let text = std::fs::read_to_string(path).map_err(|e| ModelError::Json(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }
}
