//! Sum-product networks over discrete variables.
//!
//! Nodes live in an arena in topological order: every child id is smaller
//! than its parent's id, so a single forward sweep evaluates the network and
//! touches each node and edge exactly once. Values are carried in log space.

mod json;

use std::collections::BTreeMap;

use thiserror::Error;

pub type NodeId = usize;

const NORMALIZATION_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum SpnError {
    #[error("invalid structure: {0}")]
    InvalidStructure(String),
    #[error("invalid evidence: variable {variable} value {value}")]
    InvalidEvidence { variable: usize, value: usize },
    #[error("conditioning event has probability zero")]
    ZeroEvidence,
    #[error("query variable {0} is observed in the conditioning evidence")]
    QueryObserved(usize),
    #[error("variable {0} is not in the network scope")]
    UnknownVariable(usize),
    #[error("expected {expected} level values, got {found}")]
    LevelMismatch { expected: usize, found: usize },
    #[error("json: {0}")]
    Json(String),
}

/// Univariate leaf distribution over `0..domain_size`.
#[derive(Debug, Clone, PartialEq)]
pub enum LeafDistribution {
    Bernoulli { p: f64 },
    Categorical { probs: Vec<f64> },
}

impl LeafDistribution {
    pub fn domain_size(&self) -> usize {
        match self {
            LeafDistribution::Bernoulli { .. } => 2,
            LeafDistribution::Categorical { probs } => probs.len(),
        }
    }

    pub fn mass(&self, value: usize) -> f64 {
        match self {
            LeafDistribution::Bernoulli { p } => match value {
                0 => 1.0 - p,
                1 => *p,
                _ => 0.0,
            },
            LeafDistribution::Categorical { probs } => probs.get(value).copied().unwrap_or(0.0),
        }
    }

    fn validate(&self) -> Result<(), SpnError> {
        match self {
            LeafDistribution::Bernoulli { p } => {
                if !(0.0..=1.0).contains(p) {
                    return Err(SpnError::InvalidStructure(format!("bernoulli p = {p} outside [0,1]")));
                }
            }
            LeafDistribution::Categorical { probs } => {
                if probs.is_empty() {
                    return Err(SpnError::InvalidStructure("empty categorical".into()));
                }
                if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
                    return Err(SpnError::InvalidStructure("categorical entry outside [0,1]".into()));
                }
                let s: f64 = probs.iter().sum();
                if (s - 1.0).abs() > NORMALIZATION_TOL {
                    return Err(SpnError::InvalidStructure(format!("categorical sums to {s}")));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Sum { children: Vec<NodeId>, weights: Vec<f64> },
    Product { children: Vec<NodeId> },
    Leaf { variable: usize, dist: LeafDistribution },
}

impl Node {
    pub fn children(&self) -> &[NodeId] {
        match self {
            Node::Sum { children, .. } | Node::Product { children } => children,
            Node::Leaf { .. } => &[],
        }
    }
}

/// Per-variable evidence state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarState {
    Observed(usize),
    Marginalized,
}

/// Observed values for some variables; every other variable is marginalized.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Evidence {
    observed: BTreeMap<usize, usize>,
}

impl Evidence {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, variable: usize, value: usize) -> Self {
        self.observed.insert(variable, value);
        self
    }

    pub fn set(&mut self, variable: usize, value: usize) {
        self.observed.insert(variable, value);
    }

    pub fn marginalize(&mut self, variable: usize) {
        self.observed.remove(&variable);
    }

    pub fn state(&self, variable: usize) -> VarState {
        match self.observed.get(&variable) {
            Some(&v) => VarState::Observed(v),
            None => VarState::Marginalized,
        }
    }

    pub fn observed(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.observed.iter().map(|(&k, &v)| (k, v))
    }

    /// Evidence observing `values[i]` for `variables[i]`.
    pub fn from_assignment(variables: &[usize], values: &[usize]) -> Self {
        Self {
            observed: variables.iter().copied().zip(values.iter().copied()).collect(),
        }
    }
}

/// Counters from an instrumented evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EvalStats {
    pub node_visits: usize,
    pub edge_visits: usize,
}

/// A validated sum-product network.
#[derive(Debug, Clone, PartialEq)]
pub struct Spn {
    nodes: Vec<Node>,
    root: NodeId,
    scopes: Vec<Vec<usize>>,
    domains: BTreeMap<usize, usize>,
}

/// Appends nodes in topological order.
#[derive(Debug, Default, Clone)]
pub struct SpnBuilder {
    nodes: Vec<Node>,
}

impl SpnBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn leaf(&mut self, variable: usize, dist: LeafDistribution) -> NodeId {
        self.nodes.push(Node::Leaf { variable, dist });
        self.nodes.len() - 1
    }

    pub fn bernoulli(&mut self, variable: usize, p: f64) -> NodeId {
        self.leaf(variable, LeafDistribution::Bernoulli { p })
    }

    pub fn product(&mut self, children: Vec<NodeId>) -> NodeId {
        self.nodes.push(Node::Product { children });
        self.nodes.len() - 1
    }

    pub fn sum(&mut self, children: Vec<NodeId>, weights: Vec<f64>) -> NodeId {
        self.nodes.push(Node::Sum { children, weights });
        self.nodes.len() - 1
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn build(self, root: NodeId) -> Result<Spn, SpnError> {
        Spn::new(self.nodes, root)
    }

    pub fn build_relaxed(self, root: NodeId) -> Result<Spn, SpnError> {
        Spn::new_relaxed(self.nodes, root)
    }
}

impl Spn {
    /// Validates structure, normalization, completeness and decomposability.
    pub fn new(nodes: Vec<Node>, root: NodeId) -> Result<Self, SpnError> {
        Self::validate(nodes, root, true)
    }

    /// Like [`Spn::new`] but allows sum weights that do not sum to one.
    pub fn new_relaxed(nodes: Vec<Node>, root: NodeId) -> Result<Self, SpnError> {
        Self::validate(nodes, root, false)
    }

    fn validate(nodes: Vec<Node>, root: NodeId, normalized: bool) -> Result<Self, SpnError> {
        let invalid = |m: String| Err(SpnError::InvalidStructure(m));
        if root >= nodes.len() {
            return invalid(format!("root {root} out of range"));
        }
        if root != nodes.len() - 1 {
            return invalid("nodes after the root are unreachable".into());
        }
        let mut domains: BTreeMap<usize, usize> = BTreeMap::new();
        let mut scopes: Vec<Vec<usize>> = Vec::with_capacity(nodes.len());
        let mut has_parent = vec![false; nodes.len()];
        for (id, node) in nodes.iter().enumerate() {
            for &c in node.children() {
                if c >= id {
                    return invalid(format!("node {id} has child {c} not preceding it"));
                }
                has_parent[c] = true;
            }
            let scope = match node {
                Node::Leaf { variable, dist } => {
                    dist.validate()?;
                    let d = dist.domain_size();
                    match domains.get(variable) {
                        Some(&prev) if prev != d => {
                            return invalid(format!("variable {variable} has leaves with domains {prev} and {d}"))
                        }
                        _ => {
                            domains.insert(*variable, d);
                        }
                    }
                    vec![*variable]
                }
                Node::Sum { children, weights } => {
                    if children.is_empty() {
                        return invalid(format!("sum node {id} has no children"));
                    }
                    if children.len() != weights.len() {
                        return invalid(format!(
                            "sum node {id}: {} children, {} weights",
                            children.len(),
                            weights.len()
                        ));
                    }
                    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
                        return invalid(format!("sum node {id} has a negative or non-finite weight"));
                    }
                    if normalized {
                        let s: f64 = weights.iter().sum();
                        if (s - 1.0).abs() > NORMALIZATION_TOL {
                            return invalid(format!("sum node {id} weights sum to {s}"));
                        }
                    }
                    let first = &scopes[children[0]];
                    if children.iter().any(|&c| &scopes[c] != first) {
                        return invalid(format!("sum node {id} is not complete"));
                    }
                    first.clone()
                }
                Node::Product { children } => {
                    if children.is_empty() {
                        return invalid(format!("product node {id} has no children"));
                    }
                    let mut union: Vec<usize> = Vec::new();
                    for &c in children {
                        union.extend_from_slice(&scopes[c]);
                    }
                    let total = union.len();
                    union.sort_unstable();
                    union.dedup();
                    if union.len() != total {
                        return invalid(format!("product node {id} is not decomposable"));
                    }
                    union
                }
            };
            scopes.push(scope);
        }
        // Topological order plus "every non-root node has a parent" means
        // every node is reachable from the root.
        if let Some(orphan) = (0..root).find(|&i| !has_parent[i]) {
            return invalid(format!("node {orphan} is unreachable from the root"));
        }
        Ok(Self {
            nodes,
            root,
            scopes,
            domains,
        })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.nodes.iter().map(|n| n.children().len()).sum()
    }

    pub fn scope(&self, node: NodeId) -> &[usize] {
        &self.scopes[node]
    }

    /// Variables in the root scope, sorted.
    pub fn variables(&self) -> &[usize] {
        &self.scopes[self.root]
    }

    pub fn domain_size(&self, variable: usize) -> Option<usize> {
        self.domains.get(&variable).copied()
    }

    fn check_evidence(&self, evidence: &Evidence) -> Result<(), SpnError> {
        for (variable, value) in evidence.observed() {
            match self.domains.get(&variable) {
                Some(&d) if value < d => {}
                _ => return Err(SpnError::InvalidEvidence { variable, value }),
            }
        }
        Ok(())
    }

    fn sweep(&self, evidence: &Evidence, stats: &mut EvalStats) -> f64 {
        let mut values = vec![0.0f64; self.nodes.len()];
        for (id, node) in self.nodes.iter().enumerate() {
            stats.node_visits += 1;
            values[id] = match node {
                Node::Leaf { variable, dist } => match evidence.state(*variable) {
                    VarState::Observed(v) => dist.mass(v).ln(),
                    VarState::Marginalized => 0.0,
                },
                Node::Product { children } => {
                    stats.edge_visits += children.len();
                    children.iter().map(|&c| values[c]).sum()
                }
                Node::Sum { children, weights } => {
                    stats.edge_visits += children.len();
                    log_sum_exp(children.iter().zip(weights).map(|(&c, &w)| w.ln() + values[c]))
                }
            };
        }
        values[self.root]
    }

    /// `ln S(evidence)`; `-inf` for zero-mass evidence.
    pub fn log_evaluate(&self, evidence: &Evidence) -> Result<f64, SpnError> {
        self.check_evidence(evidence)?;
        Ok(self.sweep(evidence, &mut EvalStats::default()))
    }

    /// Unnormalized network value `S(evidence)`.
    pub fn evaluate(&self, evidence: &Evidence) -> Result<f64, SpnError> {
        self.log_evaluate(evidence).map(f64::exp)
    }

    /// Evaluates while counting node and edge visits.
    pub fn evaluate_instrumented(&self, evidence: &Evidence) -> Result<(f64, EvalStats), SpnError> {
        self.check_evidence(evidence)?;
        let mut stats = EvalStats::default();
        let v = self.sweep(evidence, &mut stats);
        Ok((v.exp(), stats))
    }

    pub fn log_partition(&self) -> f64 {
        self.sweep(&Evidence::new(), &mut EvalStats::default())
    }

    /// Total mass `Z(S)`: the network evaluated with every variable marginalized.
    pub fn partition(&self) -> f64 {
        self.log_partition().exp()
    }

    pub fn log_probability(&self, evidence: &Evidence) -> Result<f64, SpnError> {
        Ok(self.log_evaluate(evidence)? - self.log_partition())
    }

    /// `S(evidence) / Z(S)`.
    pub fn probability(&self, evidence: &Evidence) -> Result<f64, SpnError> {
        self.log_probability(evidence).map(f64::exp)
    }

    /// Distribution of `query` given `given`, one entry per level.
    pub fn conditional(&self, query: usize, given: &Evidence) -> Result<Vec<f64>, SpnError> {
        let domain = self.domain_size(query).ok_or(SpnError::UnknownVariable(query))?;
        if let VarState::Observed(_) = given.state(query) {
            return Err(SpnError::QueryObserved(query));
        }
        let log_given = self.log_evaluate(given)?;
        if log_given == f64::NEG_INFINITY {
            return Err(SpnError::ZeroEvidence);
        }
        let mut ev = given.clone();
        (0..domain)
            .map(|d| {
                ev.set(query, d);
                Ok((self.sweep(&ev, &mut EvalStats::default()) - log_given).exp())
            })
            .collect()
    }

    /// `sum_d level_values[d] * P(query = d | given)`.
    pub fn expectation(&self, query: usize, level_values: &[f64], given: &Evidence) -> Result<f64, SpnError> {
        let domain = self.domain_size(query).ok_or(SpnError::UnknownVariable(query))?;
        if level_values.len() != domain {
            return Err(SpnError::LevelMismatch {
                expected: domain,
                found: level_values.len(),
            });
        }
        let cond = self.conditional(query, given)?;
        Ok(cond.iter().zip(level_values).map(|(p, v)| p * v).sum())
    }
}

pub(crate) fn log_sum_exp<I: Iterator<Item = f64>>(terms: I) -> f64 {
    let terms: Vec<f64> = terms.collect();
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}
