//! Percentile-equivalence repair.
//!
//! Each group's values are mapped to the value of the pooled ("fair")
//! distribution at the same percentile, so individuals at equal within-group
//! percentiles receive identical repaired values.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Slack when comparing cumulative probabilities built from different sums.
const PERCENTILE_TOL: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum QuantileError {
    #[error("no values to fit")]
    EmptyInput,
    #[error("group {0} has no values")]
    EmptyGroup(usize),
    #[error("group {0} is not known to the repair map")]
    UnknownGroup(usize),
    #[error("attribute {0} is not known to the repair map")]
    UnknownAttribute(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("json: {0}")]
    Json(String),
}

/// Right-continuous step CDF over sorted distinct values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalCdf {
    values: Vec<f64>,
    cumulative: Vec<f64>,
    total: f64,
}

impl EmpiricalCdf {
    /// Mass `1/n` per point, or proportional to `weights`.
    pub fn fit(values: &[f64], weights: Option<&[f64]>) -> Result<Self, QuantileError> {
        if values.is_empty() {
            return Err(QuantileError::EmptyInput);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(QuantileError::Invalid("non-finite value".into()));
        }
        let w: Vec<f64> = match weights {
            Some(w) if w.len() != values.len() => {
                return Err(QuantileError::Invalid("weights and values differ in length".into()))
            }
            Some(w) if w.iter().any(|x| !(x.is_finite() && *x >= 0.0)) => {
                return Err(QuantileError::Invalid("weights must be finite and non-negative".into()))
            }
            Some(w) => w.to_vec(),
            None => vec![1.0; values.len()],
        };
        let mut pairs: Vec<(f64, f64)> = values.iter().copied().zip(w).filter(|(_, w)| *w > 0.0).collect();
        if pairs.is_empty() {
            return Err(QuantileError::EmptyInput);
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let total: f64 = pairs.iter().map(|p| p.1).sum();
        let mut vals = Vec::new();
        let mut mass: Vec<f64> = Vec::new();
        for (v, w) in pairs {
            if vals.last() == Some(&v) {
                *mass.last_mut().unwrap() += w;
            } else {
                vals.push(v);
                mass.push(w);
            }
        }
        let mut acc = 0.0;
        let mut cumulative: Vec<f64> = mass
            .iter()
            .map(|m| {
                acc += m;
                acc / total
            })
            .collect();
        *cumulative.last_mut().unwrap() = 1.0;
        Ok(Self {
            values: vals,
            cumulative,
            total,
        })
    }

    /// Weighted mixture of CDFs; `weights` are normalized.
    pub fn mixture(cdfs: &[&EmpiricalCdf], weights: &[f64]) -> Result<Self, QuantileError> {
        if cdfs.is_empty() || cdfs.len() != weights.len() {
            return Err(QuantileError::Invalid("mixture needs one weight per component".into()));
        }
        let wsum: f64 = weights.iter().sum();
        let mut values: Vec<f64> = cdfs.iter().flat_map(|c| c.values.iter().copied()).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        let mut cumulative: Vec<f64> = values
            .iter()
            .map(|&v| cdfs.iter().zip(weights).map(|(c, w)| w / wsum * c.cdf(v)).sum())
            .collect();
        *cumulative.last_mut().unwrap() = 1.0;
        Ok(Self {
            values,
            cumulative,
            total: cdfs.iter().map(|c| c.total).sum(),
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        *self.values.last().unwrap()
    }

    /// `P(X <= x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        let k = self.values.partition_point(|&v| v <= x);
        if k == 0 {
            0.0
        } else {
            self.cumulative[k - 1]
        }
    }

    /// Step CDF at support points, linear in between; `None` outside `[min, max]`.
    pub fn interpolated(&self, x: f64) -> Option<f64> {
        if x < self.min() || x > self.max() {
            return None;
        }
        let k = self.values.partition_point(|&v| v < x);
        if self.values[k] == x {
            return Some(self.cumulative[k]);
        }
        let (x0, x1) = (self.values[k - 1], self.values[k]);
        let (f0, f1) = (self.cumulative[k - 1], self.cumulative[k]);
        Some(f0 + (f1 - f0) * (x - x0) / (x1 - x0))
    }

    /// Smallest support value whose cumulative probability reaches `q`.
    pub fn inverse(&self, q: f64) -> f64 {
        let k = self.cumulative.partition_point(|&c| c < q - PERCENTILE_TOL);
        self.values[k.min(self.values.len() - 1)]
    }
}

/// Repair of one attribute: per-group CDFs and their pooled mixture.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributeRepair {
    groups: Vec<EmpiricalCdf>,
    weights: Vec<f64>,
    joint: EmpiricalCdf,
}

/// Fits the repair of one attribute; `groups[i]` in `0..n_groups` is the group of `values[i]`.
pub fn fit_quantile_map(values: &[f64], groups: &[usize], n_groups: usize) -> Result<AttributeRepair, QuantileError> {
    if values.len() != groups.len() {
        return Err(QuantileError::Invalid("values and groups differ in length".into()));
    }
    if values.is_empty() {
        return Err(QuantileError::EmptyInput);
    }
    let mut per_group: Vec<Vec<f64>> = vec![Vec::new(); n_groups];
    for (&v, &g) in values.iter().zip(groups) {
        per_group.get_mut(g).ok_or(QuantileError::UnknownGroup(g))?.push(v);
    }
    let cdfs = per_group
        .iter()
        .enumerate()
        .map(|(g, vs)| {
            if vs.is_empty() {
                Err(QuantileError::EmptyGroup(g))
            } else {
                EmpiricalCdf::fit(vs, None)
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    let n = values.len() as f64;
    let weights: Vec<f64> = per_group.iter().map(|v| v.len() as f64 / n).collect();
    AttributeRepair::from_parts(cdfs, weights)
}

impl AttributeRepair {
    pub fn from_parts(groups: Vec<EmpiricalCdf>, weights: Vec<f64>) -> Result<Self, QuantileError> {
        let refs: Vec<&EmpiricalCdf> = groups.iter().collect();
        let joint = EmpiricalCdf::mixture(&refs, &weights)?;
        Ok(Self { groups, weights, joint })
    }

    pub fn joint(&self) -> &EmpiricalCdf {
        &self.joint
    }

    pub fn group(&self, g: usize) -> Option<&EmpiricalCdf> {
        self.groups.get(g)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn n_groups(&self) -> usize {
        self.groups.len()
    }

    /// Repaired value of `value` observed in group `group`.
    pub fn apply(&self, value: f64, group: usize) -> Result<f64, QuantileError> {
        let cdf = self.groups.get(group).ok_or(QuantileError::UnknownGroup(group))?;
        if value < cdf.min() {
            return Ok(self.joint.min());
        }
        if value > cdf.max() {
            return Ok(self.joint.max());
        }
        let q = cdf.interpolated(value).expect("value inside the group support");
        Ok(self.joint.inverse(q))
    }

    pub fn apply_all(&self, values: &[f64], groups: &[usize]) -> Result<Vec<f64>, QuantileError> {
        values.iter().zip(groups).map(|(&v, &g)| self.apply(v, g)).collect()
    }

    /// `(value, repaired)` for each observed value of `group`.
    pub fn pairs(&self, group: usize) -> Vec<(f64, f64)> {
        self.groups[group]
            .values()
            .iter()
            .map(|&v| (v, self.apply(v, group).expect("known group")))
            .collect()
    }
}

/// Repairs for several attributes, keyed by attribute name.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileRepairMap {
    pub group_names: Vec<String>,
    pub attributes: BTreeMap<String, AttributeRepair>,
}

#[derive(Serialize, Deserialize)]
struct GroupJson {
    pairs: Vec<(f64, f64)>,
    cdf: EmpiricalCdf,
    weight: f64,
}

impl QuantileRepairMap {
    pub fn new(group_names: Vec<String>) -> Self {
        Self {
            group_names,
            attributes: BTreeMap::new(),
        }
    }

    pub fn fit_attribute(&mut self, name: &str, values: &[f64], groups: &[usize]) -> Result<(), QuantileError> {
        let repair = fit_quantile_map(values, groups, self.group_names.len())?;
        self.attributes.insert(name.to_string(), repair);
        Ok(())
    }

    pub fn apply_repair(&self, attribute: &str, value: f64, group: usize) -> Result<f64, QuantileError> {
        self.attributes
            .get(attribute)
            .ok_or_else(|| QuantileError::UnknownAttribute(attribute.to_string()))?
            .apply(value, group)
    }

    /// `{attribute: {group: {"pairs": [[value, repaired], ...], "cdf": ..., "weight": w}}}`.
    pub fn to_json_string(&self) -> String {
        let doc: BTreeMap<&str, BTreeMap<&str, GroupJson>> = self
            .attributes
            .iter()
            .map(|(name, rep)| {
                let groups = self
                    .group_names
                    .iter()
                    .enumerate()
                    .map(|(g, gname)| {
                        (
                            gname.as_str(),
                            GroupJson {
                                pairs: rep.pairs(g),
                                cdf: rep.groups[g].clone(),
                                weight: rep.weights[g],
                            },
                        )
                    })
                    .collect();
                (name.as_str(), groups)
            })
            .collect();
        serde_json::to_string_pretty(&doc).expect("repair map serializes")
    }

    pub fn from_json_str(text: &str, group_names: &[String]) -> Result<Self, QuantileError> {
        let doc: BTreeMap<String, BTreeMap<String, GroupJson>> =
            serde_json::from_str(text).map_err(|e| QuantileError::Json(e.to_string()))?;
        let mut map = Self::new(group_names.to_vec());
        for (name, mut groups) in doc {
            let mut cdfs = Vec::new();
            let mut weights = Vec::new();
            for gname in group_names {
                let g = groups
                    .remove(gname)
                    .ok_or_else(|| QuantileError::Json(format!("{name}: missing group {gname:?}")))?;
                cdfs.push(g.cdf);
                weights.push(g.weight);
            }
            map.attributes.insert(name, AttributeRepair::from_parts(cdfs, weights)?);
        }
        Ok(map)
    }

    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.to_json_string())
    }

    pub fn load(path: &Path, group_names: &[String]) -> Result<Self, QuantileError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| QuantileError::Json(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text, group_names)
    }
}

/// Two-sample Kolmogorov-Smirnov distance `sup |F_a - F_b|`.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> Result<f64, QuantileError> {
    let fa = EmpiricalCdf::fit(a, None)?;
    let fb = EmpiricalCdf::fit(b, None)?;
    Ok(fa
        .values()
        .iter()
        .chain(fb.values())
        .map(|&x| (fa.cdf(x) - fb.cdf(x)).abs())
        .fold(0.0, f64::max))
}
