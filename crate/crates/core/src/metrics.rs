//! Accuracy and group-fairness measures.
//!
//! Every gap is "group A minus group B" for a configurable pair of protected
//! levels, so swapping the roles negates it exactly. Group means are summed in
//! sorted order, which makes them independent of row order bit for bit.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MetricError {
    #[error("protected group {0} has no rows")]
    EmptyGroup(usize),
    #[error("a group has no positive predictions")]
    NoPositivePredictions,
    #[error("a group has no positive outcomes")]
    NoPositiveOutcomes,
    #[error("quartile {0} of the focus group is empty")]
    EmptyQuartile(usize),
    #[error("input lengths differ")]
    LengthMismatch,
    #[error("invalid input: {0}")]
    Invalid(String),
}

/// Which protected level plays group A (minuend) and which group B.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupRoles {
    pub a: usize,
    pub b: usize,
}

impl GroupRoles {
    pub fn new(a: usize, b: usize) -> Self {
        Self { a, b }
    }

    pub fn swapped(self) -> Self {
        Self { a: self.b, b: self.a }
    }
}

/// Which reading of equality of opportunity to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OpportunityForm {
    /// `P(y=1 | y_hat=1, a)`: conditions on the prediction.
    Precision,
    /// `P(y_hat=1 | y=1, a)`: conditions on the outcome.
    Recall,
}

/// Mean summed in ascending order.
fn ordered_mean(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v.iter().sum::<f64>() / v.len() as f64
}

fn group_values<T: Copy>(values: &[T], protected: &[usize], g: usize) -> Vec<T> {
    values
        .iter()
        .zip(protected)
        .filter(|(_, &p)| p == g)
        .map(|(&v, _)| v)
        .collect()
}

fn rate(hits: usize, n: usize) -> f64 {
    hits as f64 / n as f64
}

fn check_len(a: usize, b: usize) -> Result<(), MetricError> {
    if a != b {
        Err(MetricError::LengthMismatch)
    } else {
        Ok(())
    }
}

pub fn accuracy(predictions: &[usize], labels: &[usize]) -> Result<f64, MetricError> {
    check_len(predictions.len(), labels.len())?;
    if labels.is_empty() {
        return Err(MetricError::Invalid("no rows".into()));
    }
    let hits = predictions.iter().zip(labels).filter(|(p, l)| p == l).count();
    Ok(rate(hits, labels.len()))
}

pub fn mean_squared_error(predictions: &[f64], targets: &[f64]) -> Result<f64, MetricError> {
    check_len(predictions.len(), targets.len())?;
    if targets.is_empty() {
        return Err(MetricError::Invalid("no rows".into()));
    }
    Ok(ordered_mean(
        predictions
            .iter()
            .zip(targets)
            .map(|(p, t)| (p - t) * (p - t))
            .collect(),
    ))
}

fn positive_rate(predictions: &[usize], protected: &[usize], g: usize) -> Result<f64, MetricError> {
    let v = group_values(predictions, protected, g);
    if v.is_empty() {
        return Err(MetricError::EmptyGroup(g));
    }
    Ok(rate(v.iter().filter(|&&p| p == 1).count(), v.len()))
}

/// `P(y_hat=1 | A) - P(y_hat=1 | B)`.
pub fn disparate_classification_impact(
    predictions: &[usize],
    protected: &[usize],
    roles: GroupRoles,
) -> Result<f64, MetricError> {
    check_len(predictions.len(), protected.len())?;
    Ok(positive_rate(predictions, protected, roles.a)? - positive_rate(predictions, protected, roles.b)?)
}

/// Difference of positive-prediction rates; identical to the classification impact.
pub fn demographic_parity_gap(
    predictions: &[usize],
    protected: &[usize],
    roles: GroupRoles,
) -> Result<f64, MetricError> {
    disparate_classification_impact(predictions, protected, roles)
}

/// Mean of `values` in group `g`.
pub fn group_mean(values: &[f64], protected: &[usize], g: usize) -> Result<f64, MetricError> {
    let v = group_values(values, protected, g);
    if v.is_empty() {
        return Err(MetricError::EmptyGroup(g));
    }
    Ok(ordered_mean(v))
}

/// Mean probability in A minus mean probability in B.
pub fn probabilistic_disparate_impact(
    probabilities: &[f64],
    protected: &[usize],
    roles: GroupRoles,
) -> Result<f64, MetricError> {
    check_len(probabilities.len(), protected.len())?;
    if probabilities.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(MetricError::Invalid("probability outside [0, 1]".into()));
    }
    Ok(group_mean(probabilities, protected, roles.a)? - group_mean(probabilities, protected, roles.b)?)
}

/// Mean prediction in A minus mean prediction in B, for regression outputs.
pub fn mean_prediction_gap(predictions: &[f64], protected: &[usize], roles: GroupRoles) -> Result<f64, MetricError> {
    check_len(predictions.len(), protected.len())?;
    Ok(group_mean(predictions, protected, roles.a)? - group_mean(predictions, protected, roles.b)?)
}

fn conditional_rate(
    predictions: &[usize],
    labels: &[usize],
    protected: &[usize],
    g: usize,
    form: OpportunityForm,
) -> Result<f64, MetricError> {
    let rows: Vec<usize> = (0..labels.len()).filter(|&i| protected[i] == g).collect();
    if rows.is_empty() {
        return Err(MetricError::EmptyGroup(g));
    }
    let (cond, target): (&[usize], &[usize]) = match form {
        OpportunityForm::Precision => (predictions, labels),
        OpportunityForm::Recall => (labels, predictions),
    };
    let given: Vec<usize> = rows.into_iter().filter(|&i| cond[i] == 1).collect();
    if given.is_empty() {
        return Err(match form {
            OpportunityForm::Precision => MetricError::NoPositivePredictions,
            OpportunityForm::Recall => MetricError::NoPositiveOutcomes,
        });
    }
    Ok(rate(given.iter().filter(|&&i| target[i] == 1).count(), given.len()))
}

/// Equality-of-opportunity gap in the chosen form.
pub fn equality_of_opportunity_gap(
    predictions: &[usize],
    labels: &[usize],
    protected: &[usize],
    roles: GroupRoles,
    form: OpportunityForm,
) -> Result<f64, MetricError> {
    check_len(predictions.len(), labels.len())?;
    check_len(predictions.len(), protected.len())?;
    Ok(conditional_rate(predictions, labels, protected, roles.a, form)?
        - conditional_rate(predictions, labels, protected, roles.b, form)?)
}

/// Per equal-width score bin over `[0, 1]`, `|rate_A - rate_B|` of outcomes;
/// `None` where either group has no rows in the bin.
pub fn calibration_gaps(
    scores: &[f64],
    outcomes: &[usize],
    protected: &[usize],
    roles: GroupRoles,
    n_bins: usize,
) -> Result<Vec<Option<f64>>, MetricError> {
    check_len(scores.len(), outcomes.len())?;
    check_len(scores.len(), protected.len())?;
    if n_bins == 0 {
        return Err(MetricError::Invalid("n_bins must be positive".into()));
    }
    // [bin][role] -> (positives, count)
    let mut tally = vec![[(0usize, 0usize); 2]; n_bins];
    for ((&s, &o), &p) in scores.iter().zip(outcomes).zip(protected) {
        let role = if p == roles.a {
            0
        } else if p == roles.b {
            1
        } else {
            continue;
        };
        let bin = ((s * n_bins as f64).floor().max(0.0) as usize).min(n_bins - 1);
        tally[bin][role].0 += o;
        tally[bin][role].1 += 1;
    }
    Ok(tally
        .iter()
        .map(|t| {
            if t[0].1 == 0 || t[1].1 == 0 {
                None
            } else {
                Some((rate(t[0].0, t[0].1) - rate(t[1].0, t[1].1)).abs())
            }
        })
        .collect())
}

/// Smallest observed value whose empirical CDF reaches `q`. Depends only on
/// the empirical distribution, so duplicating every row leaves it unchanged.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let k = (q * v.len() as f64).ceil() as usize;
    v[k.clamp(1, v.len()) - 1]
}

/// Mean of `target - prediction` for focus-group rows, split by the focus
/// group's own target quartiles. Positive means underestimation.
pub fn underestimation_by_quartile(
    predictions: &[f64],
    targets: &[f64],
    protected: &[usize],
    focus: usize,
) -> Result<[f64; 4], MetricError> {
    check_len(predictions.len(), targets.len())?;
    check_len(predictions.len(), protected.len())?;
    let rows: Vec<usize> = (0..targets.len()).filter(|&i| protected[i] == focus).collect();
    if rows.is_empty() {
        return Err(MetricError::EmptyGroup(focus));
    }
    let t: Vec<f64> = rows.iter().map(|&i| targets[i]).collect();
    let cuts = [quantile(&t, 0.25), quantile(&t, 0.5), quantile(&t, 0.75)];
    let mut buckets: [Vec<f64>; 4] = Default::default();
    for &i in &rows {
        let q = cuts.iter().filter(|&&c| targets[i] > c).count();
        buckets[q].push(targets[i] - predictions[i]);
    }
    let mut out = [0.0; 4];
    for (q, b) in buckets.into_iter().enumerate() {
        if b.is_empty() {
            return Err(MetricError::EmptyQuartile(q));
        }
        out[q] = ordered_mean(b);
    }
    Ok(out)
}

/// Accuracy (or error) plus fairness measures for one model on one split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FairnessReport {
    pub roles: GroupRoles,
    pub group_sizes: [usize; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_squared_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub disparate_classification_impact: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probabilistic_disparate_impact: Option<f64>,
    pub demographic_parity_gap: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub equality_of_opportunity_gap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub equality_of_opportunity_recall_gap: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub calibration_gaps: Vec<Option<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub underestimation_by_quartile: Option<[f64; 4]>,
}

fn group_sizes(protected: &[usize], roles: GroupRoles) -> Result<[usize; 2], MetricError> {
    let a = protected.iter().filter(|&&p| p == roles.a).count();
    let b = protected.iter().filter(|&&p| p == roles.b).count();
    if a == 0 {
        return Err(MetricError::EmptyGroup(roles.a));
    }
    if b == 0 {
        return Err(MetricError::EmptyGroup(roles.b));
    }
    Ok([a, b])
}

impl FairnessReport {
    pub fn classification(
        predictions: &[usize],
        probabilities: &[f64],
        labels: &[usize],
        protected: &[usize],
        roles: GroupRoles,
        calibration_bins: usize,
    ) -> Result<Self, MetricError> {
        let group_sizes = group_sizes(protected, roles)?;
        let dci = disparate_classification_impact(predictions, protected, roles)?;
        let eo = |form| equality_of_opportunity_gap(predictions, labels, protected, roles, form).ok();
        Ok(Self {
            roles,
            group_sizes,
            accuracy: Some(accuracy(predictions, labels)?),
            mean_squared_error: None,
            disparate_classification_impact: Some(dci),
            probabilistic_disparate_impact: Some(probabilistic_disparate_impact(probabilities, protected, roles)?),
            demographic_parity_gap: dci,
            equality_of_opportunity_gap: eo(OpportunityForm::Precision),
            equality_of_opportunity_recall_gap: eo(OpportunityForm::Recall),
            calibration_gaps: calibration_gaps(probabilities, labels, protected, roles, calibration_bins)?,
            underestimation_by_quartile: None,
        })
    }

    /// Regression report; the parity gap is the difference of mean predictions
    /// and underestimation is measured for group A.
    pub fn regression(
        predictions: &[f64],
        targets: &[f64],
        protected: &[usize],
        roles: GroupRoles,
    ) -> Result<Self, MetricError> {
        let group_sizes = group_sizes(protected, roles)?;
        Ok(Self {
            roles,
            group_sizes,
            accuracy: None,
            mean_squared_error: Some(mean_squared_error(predictions, targets)?),
            disparate_classification_impact: None,
            probabilistic_disparate_impact: None,
            demographic_parity_gap: mean_prediction_gap(predictions, protected, roles)?,
            equality_of_opportunity_gap: None,
            equality_of_opportunity_recall_gap: None,
            calibration_gaps: Vec::new(),
            underestimation_by_quartile: underestimation_by_quartile(predictions, targets, protected, roles.a).ok(),
        })
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Two-column human-readable table.
    pub fn to_table(&self) -> String {
        let mut rows: Vec<(String, String)> = Vec::new();
        let fmt = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.4}"));
        rows.push((
            "group sizes (A, B)".into(),
            format!("{}, {}", self.group_sizes[0], self.group_sizes[1]),
        ));
        if self.accuracy.is_some() {
            rows.push(("accuracy".into(), fmt(self.accuracy)));
        }
        if self.mean_squared_error.is_some() {
            rows.push(("mean squared error".into(), fmt(self.mean_squared_error)));
        }
        if self.disparate_classification_impact.is_some() {
            rows.push((
                "disparate classification impact".into(),
                fmt(self.disparate_classification_impact),
            ));
            rows.push((
                "probabilistic disparate impact".into(),
                fmt(self.probabilistic_disparate_impact),
            ));
        }
        rows.push(("demographic parity gap".into(), fmt(Some(self.demographic_parity_gap))));
        if self.accuracy.is_some() {
            rows.push((
                "equality of opportunity gap".into(),
                fmt(self.equality_of_opportunity_gap),
            ));
            rows.push(("  recall form".into(), fmt(self.equality_of_opportunity_recall_gap)));
        }
        for (i, g) in self.calibration_gaps.iter().enumerate() {
            rows.push((format!("calibration gap, bin {i}"), fmt(*g)));
        }
        if let Some(u) = self.underestimation_by_quartile {
            for (q, v) in u.iter().enumerate() {
                rows.push((format!("underestimation, quartile {}", q + 1), fmt(Some(*v))));
            }
        }
        let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        let mut out = String::new();
        for (k, v) in rows {
            let _ = writeln!(out, "{k:<width$}  {v}");
        }
        out
    }

    /// `bin,lower,upper,gap` with an empty gap where undefined.
    pub fn calibration_csv(&self) -> String {
        let n = self.calibration_gaps.len();
        let mut out = String::from("bin,lower,upper,gap\n");
        for (i, g) in self.calibration_gaps.iter().enumerate() {
            let lo = i as f64 / n as f64;
            let hi = (i + 1) as f64 / n as f64;
            let gap = g.map_or_else(String::new, |v| v.to_string());
            let _ = writeln!(out, "{i},{lo},{hi},{gap}");
        }
        out
    }
}
