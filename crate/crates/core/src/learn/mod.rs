//! Structure learning: independence splits by pairwise G-tests, instance
//! clustering by hard EM, and the recursive learner that combines them.
//!
//! Variables are the column groups of a fully discrete [`EncodedMatrix`]; an
//! SPN variable index is the group index, and each leaf is a categorical
//! distribution over the group's levels.

mod cluster;
mod gtest;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cluster::{cluster_instances, Clustering};
pub use gtest::{g_test, ContingencyTable, GTestResult};

use crate::dataset::EncodedMatrix;
use crate::seed;
use crate::spn::{LeafDistribution, NodeId, Spn, SpnBuilder};

#[derive(Debug, Error, PartialEq)]
pub enum LearnError {
    #[error("invalid learning configuration: {0}")]
    Config(String),
    #[error("column group {0} is not discrete")]
    NotDiscrete(String),
    #[error("no rows or no variables to learn from")]
    Empty,
    #[error("json: {0}")]
    Json(String),
}

/// How the pairwise independence threshold is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GMode {
    /// Dependent when the chi-square p-value is at most the threshold.
    PValue,
    /// Dependent when the G statistic is at least the threshold.
    RawStatistic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnConfig {
    pub g_threshold: f64,
    pub mode: GMode,
    pub n_clusters: usize,
    pub em_max_iters: usize,
    pub em_restarts: usize,
    pub min_instances_to_split: usize,
    pub laplace_alpha: f64,
    pub seed: u64,
}

impl Default for LearnConfig {
    fn default() -> Self {
        Self {
            g_threshold: 1e-4,
            mode: GMode::PValue,
            n_clusters: 2,
            em_max_iters: 100,
            em_restarts: 3,
            min_instances_to_split: 30,
            laplace_alpha: 1.0,
            seed: 0,
        }
    }
}

impl LearnConfig {
    pub fn validate(&self) -> Result<(), LearnError> {
        let bad = |m: &str| Err(LearnError::Config(m.to_string()));
        match self.mode {
            GMode::PValue if !(self.g_threshold > 0.0 && self.g_threshold < 1.0) => {
                return bad("g_threshold must lie in (0, 1) in p-value mode")
            }
            GMode::RawStatistic if !(self.g_threshold >= 0.0) => return bad("g_threshold must be non-negative"),
            _ => {}
        }
        if self.n_clusters < 2 {
            return bad("n_clusters must be at least 2");
        }
        if self.min_instances_to_split == 0 {
            return bad("min_instances_to_split must be positive");
        }
        if !(self.laplace_alpha > 0.0) {
            return bad("laplace_alpha must be positive");
        }
        Ok(())
    }

    /// Whether a test result counts as a dependence edge.
    pub fn dependent(&self, r: &GTestResult) -> bool {
        if r.degenerate {
            return false;
        }
        match self.mode {
            GMode::PValue => r.p_value <= self.g_threshold,
            GMode::RawStatistic => r.statistic >= self.g_threshold,
        }
    }
}

/// Decoded level columns of a discrete encoding, one per column group.
#[derive(Debug, Clone)]
pub struct DiscreteData {
    columns: Vec<Vec<usize>>,
    domains: Vec<usize>,
    names: Vec<String>,
}

impl DiscreteData {
    pub fn from_encoded(enc: &EncodedMatrix) -> Result<Self, LearnError> {
        let rows: Vec<usize> = (0..enc.n_rows()).collect();
        let mut columns = Vec::with_capacity(enc.groups.len());
        let mut domains = Vec::with_capacity(enc.groups.len());
        for (g, grp) in enc.groups.iter().enumerate() {
            let d = grp
                .domain_size()
                .ok_or_else(|| LearnError::NotDiscrete(grp.name.clone()))?;
            columns.push(enc.levels(g, &rows));
            domains.push(d);
        }
        Ok(Self {
            columns,
            domains,
            names: enc.groups.iter().map(|g| g.name.clone()).collect(),
        })
    }

    /// Builds directly from level columns.
    pub fn from_columns(columns: Vec<Vec<usize>>, domains: Vec<usize>, names: Vec<String>) -> Self {
        assert_eq!(columns.len(), domains.len());
        assert_eq!(columns.len(), names.len());
        for (c, &d) in columns.iter().zip(&domains) {
            assert!(c.iter().all(|&l| l < d), "level outside domain");
        }
        Self {
            columns,
            domains,
            names,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn n_vars(&self) -> usize {
        self.columns.len()
    }

    pub fn level(&self, row: usize, var: usize) -> usize {
        self.columns[var][row]
    }

    pub fn domain(&self, var: usize) -> usize {
        self.domains[var]
    }

    pub fn name(&self, var: usize) -> &str {
        &self.names[var]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    fn column_on(&self, var: usize, rows: &[usize]) -> Vec<usize> {
        rows.iter().map(|&r| self.columns[var][r]).collect()
    }

    fn counts(&self, var: usize, rows: &[usize]) -> Vec<f64> {
        let mut c = vec![0.0; self.domains[var]];
        for &r in rows {
            c[self.columns[var][r]] += 1.0;
        }
        c
    }

    pub fn g_test(&self, a: usize, b: usize, rows: &[usize]) -> GTestResult {
        ContingencyTable::from_levels(
            &self.column_on(a, rows),
            &self.column_on(b, rows),
            self.domains[a],
            self.domains[b],
        )
        .g_test()
    }
}

/// Disjoint variable sets covering a variable list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableSubsets {
    pub sets: Vec<Vec<usize>>,
}

impl VariableSubsets {
    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// Index of the set holding `var`.
    pub fn find(&self, var: usize) -> Option<usize> {
        self.sets.iter().position(|s| s.contains(&var))
    }

    /// Sets with every variable replaced by its name.
    pub fn named(&self, names: &[String]) -> Vec<Vec<String>> {
        self.sets
            .iter()
            .map(|s| s.iter().map(|&v| names[v].clone()).collect())
            .collect()
    }

    /// JSON array of arrays of attribute names.
    pub fn to_json_string(&self, names: &[String]) -> String {
        serde_json::to_string_pretty(&self.named(names)).expect("subsets serialize")
    }

    pub fn from_json_str(text: &str, names: &[String]) -> Result<Self, LearnError> {
        let raw: Vec<Vec<String>> = serde_json::from_str(text).map_err(|e| LearnError::Json(e.to_string()))?;
        let sets = raw
            .into_iter()
            .map(|s| {
                s.into_iter()
                    .map(|n| {
                        names
                            .iter()
                            .position(|m| *m == n)
                            .ok_or_else(|| LearnError::Json(format!("unknown attribute {n:?}")))
                    })
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { sets })
    }
}

fn find_root(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Connected components of the pairwise-dependence graph over `vars`.
///
/// Components are listed by their smallest position in `vars`, and each keeps
/// the order of `vars`.
pub fn independence_components(
    data: &DiscreteData,
    rows: &[usize],
    vars: &[usize],
    config: &LearnConfig,
) -> VariableSubsets {
    let m = vars.len();
    let mut parent: Vec<usize> = (0..m).collect();
    for i in 0..m {
        for j in i + 1..m {
            if find_root(&mut parent, i) == find_root(&mut parent, j) {
                continue;
            }
            if config.dependent(&data.g_test(vars[i], vars[j], rows)) {
                let (a, b) = (find_root(&mut parent, i), find_root(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &v) in vars.iter().enumerate() {
        let r = find_root(&mut parent, i);
        groups.entry(r).or_default().push(v);
    }
    VariableSubsets {
        sets: groups.into_values().collect(),
    }
}

/// One independence pass over every non-label group at the root.
pub fn first_split_subsets(
    enc: &EncodedMatrix,
    rows: &[usize],
    config: &LearnConfig,
) -> Result<VariableSubsets, LearnError> {
    config.validate()?;
    let data = DiscreteData::from_encoded(enc)?;
    let vars = enc.input_groups();
    Ok(independence_components(&data, rows, &vars, config))
}

/// Laplace-smoothed leaf for `var` on `rows`.
pub fn fit_leaf(data: &DiscreteData, var: usize, rows: &[usize], alpha: f64) -> LeafDistribution {
    let counts = data.counts(var, rows);
    let d = counts.len() as f64;
    let n = rows.len() as f64;
    let probs: Vec<f64> = counts.iter().map(|c| (c + alpha) / (n + alpha * d)).collect();
    if probs.len() == 2 {
        LeafDistribution::Bernoulli { p: probs[1] }
    } else {
        LeafDistribution::Categorical { probs }
    }
}

struct Learner<'a> {
    data: &'a DiscreteData,
    config: &'a LearnConfig,
    builder: SpnBuilder,
    clusterings: u64,
}

impl Learner<'_> {
    fn factorized(&mut self, rows: &[usize], vars: &[usize]) -> NodeId {
        let leaves: Vec<NodeId> = vars
            .iter()
            .map(|&v| {
                let dist = fit_leaf(self.data, v, rows, self.config.laplace_alpha);
                self.builder.leaf(v, dist)
            })
            .collect();
        if leaves.len() == 1 {
            leaves[0]
        } else {
            self.builder.product(leaves)
        }
    }

    /// `try_split` is false right after a product split: the same rows give
    /// the same tests, so the block is known to be connected.
    fn learn(&mut self, rows: &[usize], vars: &[usize], try_split: bool) -> NodeId {
        if vars.len() == 1 || rows.len() < self.config.min_instances_to_split {
            return self.factorized(rows, vars);
        }
        if try_split {
            let comps = independence_components(self.data, rows, vars, self.config);
            if comps.len() > 1 {
                let children: Vec<NodeId> = comps.sets.iter().map(|s| self.learn(rows, s, false)).collect();
                return self.builder.product(children);
            }
        }
        let seed_value = seed::derive_indexed(self.config.seed, self.clusterings);
        self.clusterings += 1;
        let clustering = cluster_instances(self.data, rows, vars, self.config, seed_value);
        if clustering.n_clusters() < 2 {
            return self.factorized(rows, vars);
        }
        let blocks = clustering.blocks(rows);
        let children: Vec<NodeId> = blocks.iter().map(|b| self.learn(b, vars, true)).collect();
        self.builder.sum(children, clustering.priors)
    }
}

/// Learns an SPN over `vars` from `rows` of `data`.
pub fn learn_spn(data: &DiscreteData, rows: &[usize], vars: &[usize], config: &LearnConfig) -> Result<Spn, LearnError> {
    config.validate()?;
    if rows.is_empty() || vars.is_empty() {
        return Err(LearnError::Empty);
    }
    let mut learner = Learner {
        data,
        config,
        builder: SpnBuilder::new(),
        clusterings: 0,
    };
    let root = learner.learn(rows, vars, true);
    Ok(learner
        .builder
        .build(root)
        .expect("learned structures are complete and decomposable"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spn::Evidence;

    fn data(cols: Vec<Vec<usize>>) -> DiscreteData {
        let domains = cols.iter().map(|c| c.iter().max().unwrap() + 1).collect();
        let names = (0..cols.len()).map(|i| format!("v{i}")).collect();
        DiscreteData::from_columns(cols, domains, names)
    }

    #[test]
    fn laplace_leaf() {
        let col = vec![1, 1, 1, 1, 1, 1, 1, 0, 0, 0];
        let d = data(vec![col]);
        let rows: Vec<usize> = (0..10).collect();
        let spn = learn_spn(&d, &rows, &[0], &LearnConfig::default()).unwrap();
        assert_eq!(spn.node_count(), 1);
        let p = spn.probability(&Evidence::new().with(0, 1)).unwrap();
        assert!((p - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn copied_column_is_one_component() {
        let a: Vec<usize> = (0..200).map(|i| (i * 7 + i / 3) % 3).collect();
        let d = data(vec![a.clone(), a]);
        let rows: Vec<usize> = (0..200).collect();
        let comps = independence_components(&d, &rows, &[0, 1], &LearnConfig::default());
        assert_eq!(comps.sets, vec![vec![0, 1]]);
    }

    #[test]
    fn raw_mode_threshold() {
        let a: Vec<usize> = (0..100).map(|i| i % 2).collect();
        let b: Vec<usize> = (0..100).map(|i| (i / 2) % 2).collect();
        let d = data(vec![a, b]);
        let rows: Vec<usize> = (0..100).collect();
        let cfg = LearnConfig {
            mode: GMode::RawStatistic,
            g_threshold: 0.5,
            ..LearnConfig::default()
        };
        assert_eq!(independence_components(&d, &rows, &[0, 1], &cfg).len(), 2);
        assert!(LearnConfig {
            g_threshold: 2.0,
            ..LearnConfig::default()
        }
        .validate()
        .is_err());
        assert!(LearnConfig {
            n_clusters: 1,
            ..LearnConfig::default()
        }
        .validate()
        .is_err());
    }

    #[test]
    fn identical_rows_collapse_to_one_cluster() {
        let d = data(vec![vec![1; 40], vec![0; 40], vec![2; 40]]);
        let rows: Vec<usize> = (0..40).collect();
        let c = cluster_instances(&d, &rows, &[0, 1, 2], &LearnConfig::default(), 5);
        assert_eq!(c.n_clusters(), 1);
        assert_eq!(c.priors, vec![1.0]);
    }

    #[test]
    fn subsets_json_round_trip() {
        let names: Vec<String> = ["sex", "age", "job"].iter().map(|s| s.to_string()).collect();
        let s = VariableSubsets {
            sets: vec![vec![0, 2], vec![1]],
        };
        let text = s.to_json_string(&names);
        assert_eq!(VariableSubsets::from_json_str(&text, &names).unwrap(), s);
        assert!(VariableSubsets::from_json_str(r#"[["nope"]]"#, &names).is_err());
    }
}
