use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{LeafDistribution, Node, NodeId, Spn, SpnError};

#[derive(Serialize, Deserialize)]
struct DistJson {
    kind: String,
    params: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct NodeJson {
    id: usize,
    #[serde(rename = "type")]
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    children: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    variable: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dist: Option<DistJson>,
}

#[derive(Serialize, Deserialize)]
struct SpnJson {
    root: usize,
    nodes: Vec<NodeJson>,
}

impl Spn {
    /// Serializes to JSON; floats are written in shortest round-trip form.
    pub fn to_json_string(&self) -> String {
        let nodes = self
            .nodes
            .iter()
            .enumerate()
            .map(|(id, node)| match node {
                Node::Sum { children, weights } => NodeJson {
                    id,
                    kind: "sum".into(),
                    children: Some(children.clone()),
                    weights: Some(weights.clone()),
                    variable: None,
                    dist: None,
                },
                Node::Product { children } => NodeJson {
                    id,
                    kind: "product".into(),
                    children: Some(children.clone()),
                    weights: None,
                    variable: None,
                    dist: None,
                },
                Node::Leaf { variable, dist } => NodeJson {
                    id,
                    kind: "leaf".into(),
                    children: None,
                    weights: None,
                    variable: Some(*variable),
                    dist: Some(match dist {
                        LeafDistribution::Bernoulli { p } => DistJson {
                            kind: "bernoulli".into(),
                            params: vec![*p],
                        },
                        LeafDistribution::Categorical { probs } => DistJson {
                            kind: "categorical".into(),
                            params: probs.clone(),
                        },
                    }),
                },
            })
            .collect();
        serde_json::to_string(&SpnJson { root: self.root, nodes }).expect("spn serializes")
    }

    /// Parses the JSON form. Node ids may be arbitrary; they are renumbered
    /// into topological order. Cycles and unreachable nodes are rejected.
    pub fn from_json_str(text: &str) -> Result<Self, SpnError> {
        let raw: SpnJson = serde_json::from_str(text).map_err(|e| SpnError::Json(e.to_string()))?;
        let mut by_id: HashMap<usize, &NodeJson> = HashMap::with_capacity(raw.nodes.len());
        for n in &raw.nodes {
            if by_id.insert(n.id, n).is_some() {
                return Err(SpnError::Json(format!("duplicate node id {}", n.id)));
            }
        }
        if !by_id.contains_key(&raw.root) {
            return Err(SpnError::Json(format!("root {} is not a node", raw.root)));
        }
        let order = topological_order(raw.root, &by_id)?;
        if order.len() != raw.nodes.len() {
            return Err(SpnError::InvalidStructure(format!(
                "{} node(s) unreachable from the root",
                raw.nodes.len() - order.len()
            )));
        }
        let new_id: HashMap<usize, NodeId> = order.iter().enumerate().map(|(i, &old)| (old, i)).collect();
        let nodes = order
            .iter()
            .map(|old| convert(by_id[old], &new_id))
            .collect::<Result<Vec<_>, _>>()?;
        let root = nodes.len() - 1;
        Spn::new(nodes, root)
    }

    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.to_json_string())
    }

    pub fn load(path: &Path) -> Result<Self, SpnError> {
        let text = std::fs::read_to_string(path).map_err(|e| SpnError::Json(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }
}

fn children_of(n: &NodeJson) -> &[usize] {
    n.children.as_deref().unwrap_or(&[])
}

/// Post-order from the root, iterative, with cycle detection.
fn topological_order(root: usize, by_id: &HashMap<usize, &NodeJson>) -> Result<Vec<usize>, SpnError> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Open,
        Done,
    }
    let mut mark: HashMap<usize, Mark> = HashMap::new();
    let mut order = Vec::new();
    let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
    mark.insert(root, Mark::Open);
    while let Some(&mut (id, ref mut next)) = stack.last_mut() {
        let children = children_of(by_id[&id]);
        if *next < children.len() {
            let c = children[*next];
            *next += 1;
            if !by_id.contains_key(&c) {
                return Err(SpnError::InvalidStructure(format!("node {id} has unknown child {c}")));
            }
            match mark.get(&c) {
                Some(Mark::Open) => return Err(SpnError::InvalidStructure(format!("cycle through node {c}"))),
                Some(Mark::Done) => {}
                None => {
                    mark.insert(c, Mark::Open);
                    stack.push((c, 0));
                }
            }
        } else {
            mark.insert(id, Mark::Done);
            order.push(id);
            stack.pop();
        }
    }
    Ok(order)
}

fn convert(n: &NodeJson, new_id: &HashMap<usize, NodeId>) -> Result<Node, SpnError> {
    let remap = |cs: &[usize]| cs.iter().map(|c| new_id[c]).collect::<Vec<_>>();
    match n.kind.as_str() {
        "sum" => Ok(Node::Sum {
            children: remap(children_of(n)),
            weights: n
                .weights
                .clone()
                .ok_or_else(|| SpnError::Json(format!("sum node {} has no weights", n.id)))?,
        }),
        "product" => Ok(Node::Product {
            children: remap(children_of(n)),
        }),
        "leaf" => {
            let variable = n
                .variable
                .ok_or_else(|| SpnError::Json(format!("leaf {} has no variable", n.id)))?;
            let d = n
                .dist
                .as_ref()
                .ok_or_else(|| SpnError::Json(format!("leaf {} has no dist", n.id)))?;
            let dist = match (d.kind.as_str(), d.params.as_slice()) {
                ("bernoulli", [p]) => LeafDistribution::Bernoulli { p: *p },
                ("categorical", ps) => LeafDistribution::Categorical { probs: ps.to_vec() },
                (k, _) => return Err(SpnError::Json(format!("leaf {}: bad dist {k:?}", n.id))),
            };
            Ok(Node::Leaf { variable, dist })
        }
        other => Err(SpnError::Json(format!("node {}: unknown type {other:?}", n.id))),
    }
}
