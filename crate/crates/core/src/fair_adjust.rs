//! Removing a protected attribute's contribution from the attributes that
//! depend on it.
//!
//! Attributes in the same first-split subset as the protected attribute are
//! "dependent"; everything else is "safe" and passes through untouched. A
//! second SPN fitted on the dependent subset supplies, per protected level,
//! the conditional mean of every numeric attribute and the conditional level
//! profile of every categorical one. Technique 1 subtracts the value for the
//! row's own protected level; Technique 2 subtracts the prior-weighted average
//! and never looks at the protected value.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{EncodedMatrix, GroupEncoding};
use crate::learn::VariableSubsets;
use crate::spn::{Evidence, Spn, SpnError};

#[derive(Debug, Error, PartialEq)]
pub enum FairError {
    #[error("protected attribute is in no subset")]
    ProtectedMissing,
    #[error("protected attribute appears in more than one subset")]
    ProtectedDuplicated,
    #[error("protected level {0} is not known to the adjustment model")]
    UnknownProtectedLevel(usize),
    #[error("attribute {0} is not in the matrix")]
    MissingAttribute(String),
    #[error("attribute {0} has no numeric level values")]
    NoLevelValues(String),
    #[error(transparent)]
    Spn(#[from] SpnError),
    #[error("json: {0}")]
    Json(String),
}

/// Attribute indices split by dependence on the protected attribute.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DependencyPartition {
    pub protected: usize,
    pub dependent: Vec<usize>,
    pub safe: Vec<usize>,
}

/// Dependent = the protected attribute's subset minus the protected attribute.
pub fn partition_by_protected(subsets: &VariableSubsets, protected: usize) -> Result<DependencyPartition, FairError> {
    let holding: Vec<usize> = (0..subsets.len())
        .filter(|&i| subsets.sets[i].contains(&protected))
        .collect();
    let home = match holding.as_slice() {
        [] => return Err(FairError::ProtectedMissing),
        [i] => *i,
        _ => return Err(FairError::ProtectedDuplicated),
    };
    if subsets.sets[home].iter().filter(|&&v| v == protected).count() > 1 {
        return Err(FairError::ProtectedDuplicated);
    }
    let mut dependent: Vec<usize> = subsets.sets[home].iter().copied().filter(|&v| v != protected).collect();
    let mut safe: Vec<usize> = subsets
        .sets
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != home)
        .flat_map(|(_, s)| s.iter().copied())
        .collect();
    dependent.sort_unstable();
    safe.sort_unstable();
    Ok(DependencyPartition {
        protected,
        dependent,
        safe,
    })
}

/// Per-level contributions of the protected attribute, keyed by attribute name.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjustmentModel {
    /// Protected level names, in level-index order.
    pub levels: Vec<String>,
    /// Empirical `P(a)` per protected level.
    pub priors: Vec<f64>,
    /// `f(a)` per protected level for numeric dependent attributes.
    pub numeric: BTreeMap<String, Vec<f64>>,
    /// Level profile `p(x | a)` per protected level for categorical dependent attributes.
    pub categorical: BTreeMap<String, Vec<Vec<f64>>>,
}

#[derive(Serialize, Deserialize)]
struct ModelJson {
    priors: BTreeMap<String, f64>,
    numeric: BTreeMap<String, BTreeMap<String, f64>>,
    categorical: BTreeMap<String, BTreeMap<String, Vec<f64>>>,
}

impl AdjustmentModel {
    /// Prior-weighted mean of `f` for a numeric attribute.
    pub fn mean_contribution(&self, attr: &str) -> Option<f64> {
        self.numeric
            .get(attr)
            .map(|f| f.iter().zip(&self.priors).map(|(f, p)| f * p).sum())
    }

    /// Prior-weighted mean profile for a categorical attribute.
    pub fn mean_profile(&self, attr: &str) -> Option<Vec<f64>> {
        self.categorical.get(attr).map(|profiles| {
            let mut out = vec![0.0; profiles[0].len()];
            for (prof, p) in profiles.iter().zip(&self.priors) {
                for (o, v) in out.iter_mut().zip(prof) {
                    *o += p * v;
                }
            }
            out
        })
    }

    pub fn to_json_string(&self) -> String {
        let by_level =
            |vals: &[f64]| -> BTreeMap<String, f64> { self.levels.iter().cloned().zip(vals.iter().copied()).collect() };
        let json = ModelJson {
            priors: by_level(&self.priors),
            numeric: self.numeric.iter().map(|(k, v)| (k.clone(), by_level(v))).collect(),
            categorical: self
                .categorical
                .iter()
                .map(|(k, v)| (k.clone(), self.levels.iter().cloned().zip(v.iter().cloned()).collect()))
                .collect(),
        };
        serde_json::to_string_pretty(&json).expect("model serializes")
    }

    /// Parses the JSON form; `levels` fixes the protected level order.
    pub fn from_json_str(text: &str, levels: &[String]) -> Result<Self, FairError> {
        let raw: ModelJson = serde_json::from_str(text).map_err(|e| FairError::Json(e.to_string()))?;
        fn ordered<T: Clone>(m: &BTreeMap<String, T>, levels: &[String]) -> Result<Vec<T>, FairError> {
            levels
                .iter()
                .map(|l| {
                    m.get(l)
                        .cloned()
                        .ok_or_else(|| FairError::Json(format!("missing level {l:?}")))
                })
                .collect()
        }
        Ok(Self {
            levels: levels.to_vec(),
            priors: ordered(&raw.priors, levels)?,
            numeric: raw
                .numeric
                .iter()
                .map(|(k, v)| Ok((k.clone(), ordered(v, levels)?)))
                .collect::<Result<_, FairError>>()?,
            categorical: raw
                .categorical
                .iter()
                .map(|(k, v)| Ok((k.clone(), ordered(v, levels)?)))
                .collect::<Result<_, FairError>>()?,
        })
    }

    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.to_json_string())
    }

    pub fn load(path: &Path, levels: &[String]) -> Result<Self, FairError> {
        let text = std::fs::read_to_string(path).map_err(|e| FairError::Json(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text, levels)
    }
}

/// Queries `spn` (variables = group indices of the discrete encoding `enc`)
/// for every dependent attribute at every protected level. Priors are the
/// protected-level fractions over `fit_rows`.
pub fn fit_adjusters(
    spn: &Spn,
    partition: &DependencyPartition,
    enc: &EncodedMatrix,
    fit_rows: &[usize],
) -> Result<AdjustmentModel, FairError> {
    let p = partition.protected;
    let pgroup = &enc.groups[p];
    let n_levels = pgroup
        .domain_size()
        .ok_or_else(|| FairError::MissingAttribute(pgroup.name.clone()))?;
    let mut priors = vec![0.0; n_levels];
    for l in enc.levels(p, fit_rows) {
        priors[l] += 1.0;
    }
    let n = fit_rows.len() as f64;
    priors.iter_mut().for_each(|c| *c /= n);

    let mut numeric = BTreeMap::new();
    let mut categorical = BTreeMap::new();
    for &g in &partition.dependent {
        let grp = &enc.groups[g];
        if grp.categorical {
            let profiles = (0..n_levels)
                .map(|a| spn.conditional(g, &Evidence::new().with(p, a)))
                .collect::<Result<Vec<_>, _>>()?;
            categorical.insert(grp.name.clone(), profiles);
        } else {
            let values = grp
                .level_values
                .as_ref()
                .ok_or_else(|| FairError::NoLevelValues(grp.name.clone()))?;
            let f = (0..n_levels)
                .map(|a| spn.expectation(g, values, &Evidence::new().with(p, a)))
                .collect::<Result<Vec<_>, _>>()?;
            numeric.insert(grp.name.clone(), f);
        }
    }
    Ok(AdjustmentModel {
        levels: pgroup.levels.clone(),
        priors,
        numeric,
        categorical,
    })
}

/// Subtracts `shift(row)` from a group's columns; one-hot blocks and binary
/// columns take a profile, numeric columns a scalar.
fn shift_group(
    m: &mut EncodedMatrix,
    group: usize,
    scalar: impl Fn(usize) -> Option<f64>,
    profile: impl Fn(usize) -> Option<Vec<f64>>,
) -> Result<(), FairError> {
    let grp = m.groups[group].clone();
    for r in 0..m.n_rows() {
        let row = m.matrix.row_mut(r);
        match grp.encoding {
            GroupEncoding::Numeric => {
                let f = scalar(r).ok_or_else(|| FairError::MissingAttribute(grp.name.clone()))?;
                row[grp.start] -= f;
            }
            GroupEncoding::Binary => {
                let prof = profile(r).ok_or_else(|| FairError::MissingAttribute(grp.name.clone()))?;
                row[grp.start] -= prof[1];
            }
            GroupEncoding::OneHot => {
                let prof = profile(r).ok_or_else(|| FairError::MissingAttribute(grp.name.clone()))?;
                for (v, p) in row[grp.columns()].iter_mut().zip(prof) {
                    *v -= p;
                }
            }
        }
    }
    Ok(())
}

fn adjusted_groups(design: &EncodedMatrix, model: &AdjustmentModel) -> Result<Vec<usize>, FairError> {
    model
        .numeric
        .keys()
        .chain(model.categorical.keys())
        .map(|name| {
            design
                .group_index(name)
                .ok_or_else(|| FairError::MissingAttribute(name.clone()))
        })
        .collect()
}

/// Keeps every group except the protected attribute and the label.
pub fn drop_protected(design: &EncodedMatrix) -> EncodedMatrix {
    let keep: Vec<usize> = (0..design.groups.len())
        .filter(|&g| Some(g) != design.protected_group && Some(g) != design.label_group)
        .collect();
    design.retain_groups(&keep)
}

/// Technique 1 on a design matrix: numeric `x - f(a)`, categorical blocks
/// `1_i - p(x | a)`, using each row's own protected level. The protected and
/// label columns are removed.
pub fn adjust_technique1(
    design: &EncodedMatrix,
    model: &AdjustmentModel,
    protected_values: &[usize],
) -> Result<EncodedMatrix, FairError> {
    assert_eq!(protected_values.len(), design.n_rows());
    if let Some(&bad) = protected_values.iter().find(|&&a| a >= model.priors.len()) {
        return Err(FairError::UnknownProtectedLevel(bad));
    }
    let mut out = design.clone();
    for g in adjusted_groups(design, model)? {
        let name = design.groups[g].name.clone();
        let f = model.numeric.get(&name);
        let prof = model.categorical.get(&name);
        shift_group(
            &mut out,
            g,
            |r| f.map(|f| f[protected_values[r]]),
            |r| prof.map(|p| p[protected_values[r]].clone()),
        )?;
    }
    Ok(drop_protected(&out))
}

/// Technique 2: subtracts the prior-weighted mean contribution, a constant per
/// attribute. The protected and label columns are removed.
pub fn center_technique2(design: &EncodedMatrix, model: &AdjustmentModel) -> Result<EncodedMatrix, FairError> {
    let mut out = design.clone();
    for g in adjusted_groups(design, model)? {
        let name = design.groups[g].name.clone();
        let f = model.mean_contribution(&name);
        let prof = model.mean_profile(&name);
        shift_group(&mut out, g, |_| f, |_| prof.clone())?;
    }
    Ok(drop_protected(&out))
}

/// Removes the dependent categorical attributes instead of adjusting them.
pub fn drop_dependent_categoricals(enc: &EncodedMatrix, model: &AdjustmentModel) -> EncodedMatrix {
    let keep: Vec<usize> = (0..enc.groups.len())
        .filter(|&g| !model.categorical.contains_key(&enc.groups[g].name))
        .collect();
    enc.retain_groups(&keep)
}
