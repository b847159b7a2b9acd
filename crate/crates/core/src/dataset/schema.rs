use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::DataError;

/// What kind of values an attribute holds.
#[derive(Debug, Clone, PartialEq)]
pub enum AttributeKind {
    Categorical { values: Vec<String> },
    Discrete { values: Vec<i64> },
    Continuous,
}

impl AttributeKind {
    /// Number of levels for the discrete kinds; `None` for continuous.
    pub fn domain_size(&self) -> Option<usize> {
        match self {
            AttributeKind::Categorical { values } => Some(values.len()),
            AttributeKind::Discrete { values } => Some(values.len()),
            AttributeKind::Continuous => None,
        }
    }

    pub fn is_categorical(&self) -> bool {
        matches!(self, AttributeKind::Categorical { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Feature,
    Protected,
    Label,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttributeSchema {
    pub name: String,
    pub kind: AttributeKind,
    pub role: Role,
    /// Raw-code rewrites applied before validation, e.g. collapsing the
    /// German Credit status/sex codes to `male`/`female`.
    pub recode: BTreeMap<String, String>,
}

impl AttributeSchema {
    pub fn categorical(name: &str, values: &[&str], role: Role) -> Self {
        Self {
            name: name.to_string(),
            kind: AttributeKind::Categorical {
                values: values.iter().map(|v| v.to_string()).collect(),
            },
            role,
            recode: BTreeMap::new(),
        }
    }

    pub fn discrete(name: &str, values: &[i64], role: Role) -> Self {
        Self {
            name: name.to_string(),
            kind: AttributeKind::Discrete {
                values: values.to_vec(),
            },
            role,
            recode: BTreeMap::new(),
        }
    }

    pub fn continuous(name: &str, role: Role) -> Self {
        Self {
            name: name.to_string(),
            kind: AttributeKind::Continuous,
            role,
            recode: BTreeMap::new(),
        }
    }
}

/// Validated attribute list: exactly one protected and one label attribute.
#[derive(Debug, Clone, PartialEq)]
pub struct Schema {
    attributes: Vec<AttributeSchema>,
    protected: usize,
    label: usize,
}

#[derive(Serialize, Deserialize)]
struct RawAttribute {
    name: String,
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    values: Option<Vec<serde_json::Value>>,
    role: Role,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    recode: BTreeMap<String, String>,
}

impl Schema {
    pub fn new(attributes: Vec<AttributeSchema>) -> Result<Self, DataError> {
        let mut names = HashSet::new();
        for a in &attributes {
            if !names.insert(a.name.as_str()) {
                return Err(DataError::Schema(format!("duplicate attribute name {}", a.name)));
            }
            match &a.kind {
                AttributeKind::Categorical { values } => {
                    if values.is_empty() {
                        return Err(DataError::Schema(format!("{}: empty value list", a.name)));
                    }
                    let set: HashSet<_> = values.iter().collect();
                    if set.len() != values.len() {
                        return Err(DataError::Schema(format!("{}: duplicate values", a.name)));
                    }
                }
                AttributeKind::Discrete { values } => {
                    if values.is_empty() {
                        return Err(DataError::Schema(format!("{}: empty value list", a.name)));
                    }
                    let set: HashSet<_> = values.iter().collect();
                    if set.len() != values.len() {
                        return Err(DataError::Schema(format!("{}: duplicate values", a.name)));
                    }
                }
                AttributeKind::Continuous => {}
            }
        }
        let find_role = |role: Role| -> Result<usize, DataError> {
            let hits: Vec<usize> = attributes
                .iter()
                .enumerate()
                .filter(|(_, a)| a.role == role)
                .map(|(i, _)| i)
                .collect();
            match hits.as_slice() {
                [i] => Ok(*i),
                _ => Err(DataError::Schema(format!(
                    "expected exactly one {:?} attribute, found {}",
                    role,
                    hits.len()
                ))),
            }
        };
        let protected = find_role(Role::Protected)?;
        let label = find_role(Role::Label)?;
        Ok(Self {
            attributes,
            protected,
            label,
        })
    }

    pub fn attributes(&self) -> &[AttributeSchema] {
        &self.attributes
    }

    pub fn len(&self) -> usize {
        self.attributes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attributes.is_empty()
    }

    pub fn attribute(&self, i: usize) -> &AttributeSchema {
        &self.attributes[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.attributes.iter().position(|a| a.name == name)
    }

    pub fn protected(&self) -> usize {
        self.protected
    }

    pub fn label(&self) -> usize {
        self.label
    }

    /// Indices of attributes with role `feature`.
    pub fn features(&self) -> Vec<usize> {
        (0..self.attributes.len())
            .filter(|&i| self.attributes[i].role == Role::Feature)
            .collect()
    }

    pub fn from_json_str(text: &str) -> Result<Self, DataError> {
        let raw: Vec<RawAttribute> = serde_json::from_str(text)?;
        let mut attrs = Vec::with_capacity(raw.len());
        for r in raw {
            let kind = match r.kind.as_str() {
                "categorical" => {
                    let values = r
                        .values
                        .ok_or_else(|| DataError::Schema(format!("{}: missing values", r.name)))?
                        .into_iter()
                        .map(|v| match v {
                            serde_json::Value::String(s) => s,
                            other => other.to_string(),
                        })
                        .collect();
                    AttributeKind::Categorical { values }
                }
                "discrete" => {
                    let values = r
                        .values
                        .ok_or_else(|| DataError::Schema(format!("{}: missing values", r.name)))?
                        .into_iter()
                        .map(|v| {
                            v.as_i64()
                                .ok_or_else(|| DataError::Schema(format!("{}: non-integer discrete value {v}", r.name)))
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    AttributeKind::Discrete { values }
                }
                "continuous" => AttributeKind::Continuous,
                other => return Err(DataError::Schema(format!("{}: unknown kind {other:?}", r.name))),
            };
            attrs.push(AttributeSchema {
                name: r.name,
                kind,
                role: r.role,
                recode: r.recode,
            });
        }
        Schema::new(attrs)
    }

    pub fn load(path: &Path) -> Result<Self, DataError> {
        let text = std::fs::read_to_string(path).map_err(|_| DataError::MissingFile(path.display().to_string()))?;
        Self::from_json_str(&text)
    }

    pub fn to_json_string(&self) -> String {
        let raw: Vec<RawAttribute> = self
            .attributes
            .iter()
            .map(|a| {
                let (kind, values) = match &a.kind {
                    AttributeKind::Categorical { values } => (
                        "categorical",
                        Some(values.iter().map(|v| serde_json::Value::from(v.as_str())).collect()),
                    ),
                    AttributeKind::Discrete { values } => (
                        "discrete",
                        Some(values.iter().map(|&v| serde_json::Value::from(v)).collect()),
                    ),
                    AttributeKind::Continuous => ("continuous", None),
                };
                RawAttribute {
                    name: a.name.clone(),
                    kind: kind.to_string(),
                    values,
                    role: a.role,
                    recode: a.recode.clone(),
                }
            })
            .collect();
        serde_json::to_string_pretty(&raw).expect("schema serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_json_schema() {
        let text = r#"[
            {"name": "color", "kind": "categorical", "values": ["red", "blue"], "role": "feature"},
            {"name": "count", "kind": "discrete", "values": [1, 2, 3], "role": "feature"},
            {"name": "height", "kind": "continuous", "role": "feature"},
            {"name": "group", "kind": "categorical", "values": ["a", "b"], "role": "protected"},
            {"name": "y", "kind": "categorical", "values": [0, 1], "role": "label"}
        ]"#;
        let s = Schema::from_json_str(text).unwrap();
        assert_eq!(s.len(), 5);
        assert_eq!(s.protected(), 3);
        assert_eq!(s.label(), 4);
        assert_eq!(s.features(), vec![0, 1, 2]);
        assert_eq!(
            s.attribute(4).kind,
            AttributeKind::Categorical {
                values: vec!["0".into(), "1".into()]
            }
        );
        let again = Schema::from_json_str(&s.to_json_string()).unwrap();
        assert_eq!(again, s);
    }

    #[test]
    fn rejects_two_protected() {
        let attrs = vec![
            AttributeSchema::categorical("a", &["x", "y"], Role::Protected),
            AttributeSchema::categorical("b", &["x", "y"], Role::Protected),
            AttributeSchema::categorical("c", &["x", "y"], Role::Label),
        ];
        assert!(matches!(Schema::new(attrs), Err(DataError::Schema(_))));
    }

    #[test]
    fn rejects_duplicate_and_empty_values() {
        let dup = vec![
            AttributeSchema::categorical("a", &["x", "x"], Role::Protected),
            AttributeSchema::categorical("c", &["x", "y"], Role::Label),
        ];
        assert!(Schema::new(dup).is_err());
        let empty = vec![
            AttributeSchema::categorical("a", &[], Role::Protected),
            AttributeSchema::categorical("c", &["x", "y"], Role::Label),
        ];
        assert!(Schema::new(empty).is_err());
    }

    #[test]
    fn rejects_unknown_kind() {
        let text = r#"[{"name": "a", "kind": "ordinal", "values": [], "role": "feature"}]"#;
        assert!(matches!(Schema::from_json_str(text), Err(DataError::Schema(_))));
    }
}
