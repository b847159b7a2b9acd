use serde::{Deserialize, Serialize};

use super::{AttributeKind, DataError, Dataset};
use crate::matrix::Matrix;

/// How numeric (discrete and continuous) attributes are represented.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NumericMode {
    /// Discrete numerics one-hot; continuous values binned into equal-width
    /// bins and one-hot. Every group is then a discrete variable.
    Binned { n_bins: usize },
    /// Numerics kept as a single raw-valued column.
    Raw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupEncoding {
    /// One column per level, exactly one of them set.
    OneHot,
    /// Two-level attribute held in one column as the level index (0 or 1).
    Binary,
    /// A single raw numeric column.
    Numeric,
}

/// The encoded columns produced by one source attribute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnGroup {
    pub attribute: usize,
    pub name: String,
    pub start: usize,
    pub width: usize,
    pub encoding: GroupEncoding,
    /// Level labels (empty for `Numeric` groups).
    pub levels: Vec<String>,
    /// Numeric value of each level: raw value for discrete numerics, bin
    /// midpoint for binned continuous attributes, absent for categoricals.
    pub level_values: Option<Vec<f64>>,
    /// `n_bins + 1` equal-width boundaries for binned continuous attributes.
    pub bin_edges: Option<Vec<f64>>,
    pub categorical: bool,
}

impl ColumnGroup {
    pub fn columns(&self) -> std::ops::Range<usize> {
        self.start..self.start + self.width
    }

    /// Number of levels; `None` for raw numeric groups.
    pub fn domain_size(&self) -> Option<usize> {
        match self.encoding {
            GroupEncoding::OneHot => Some(self.width),
            GroupEncoding::Binary => Some(2),
            GroupEncoding::Numeric => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncodedMatrix {
    pub matrix: Matrix,
    pub groups: Vec<ColumnGroup>,
    pub protected_group: Option<usize>,
    pub label_group: Option<usize>,
}

impl EncodedMatrix {
    pub fn n_rows(&self) -> usize {
        self.matrix.rows()
    }

    pub fn n_cols(&self) -> usize {
        self.matrix.cols()
    }

    pub fn group_index(&self, name: &str) -> Option<usize> {
        self.groups.iter().position(|g| g.name == name)
    }

    /// Decoded level of `row` in a discrete group (argmax of a one-hot block).
    pub fn level(&self, row: usize, group: usize) -> Option<usize> {
        let g = &self.groups[group];
        let r = self.matrix.row(row);
        match g.encoding {
            GroupEncoding::Binary => Some(usize::from(r[g.start] >= 0.5)),
            GroupEncoding::OneHot => {
                let block = &r[g.columns()];
                let mut best = 0;
                for (i, &v) in block.iter().enumerate() {
                    if v > block[best] {
                        best = i;
                    }
                }
                Some(best)
            }
            GroupEncoding::Numeric => None,
        }
    }

    /// Decoded levels of a discrete group over the given rows.
    pub fn levels(&self, group: usize, rows: &[usize]) -> Vec<usize> {
        rows.iter()
            .map(|&r| self.level(r, group).expect("group is not discrete"))
            .collect()
    }

    /// Column indices of the given groups, in group order.
    pub fn columns_of(&self, groups: &[usize]) -> Vec<usize> {
        groups.iter().flat_map(|&g| self.groups[g].columns()).collect()
    }

    /// Keeps only the named groups (in their existing order), renumbering columns.
    pub fn retain_groups(&self, keep: &[usize]) -> EncodedMatrix {
        let mut keep = keep.to_vec();
        keep.sort_unstable();
        keep.dedup();
        let cols = self.columns_of(&keep);
        let matrix = self.matrix.select_columns(&cols);
        let mut groups = Vec::with_capacity(keep.len());
        let mut start = 0;
        for &g in &keep {
            let mut grp = self.groups[g].clone();
            grp.start = start;
            start += grp.width;
            groups.push(grp);
        }
        let remap = |old: Option<usize>| old.and_then(|o| keep.iter().position(|&g| g == o));
        EncodedMatrix {
            matrix,
            groups,
            protected_group: remap(self.protected_group),
            label_group: remap(self.label_group),
        }
    }

    /// Groups for the source attributes with role `feature` or `protected`.
    pub fn input_groups(&self) -> Vec<usize> {
        (0..self.groups.len())
            .filter(|&g| Some(g) != self.label_group)
            .collect()
    }
}

#[derive(Debug, Clone)]
enum Plan {
    Levels,
    Bins { min: f64, max: f64, n_bins: usize },
    Raw,
}

/// Encoding fitted on a subset of rows (bin ranges come from those rows only).
#[derive(Debug, Clone)]
pub struct Encoder {
    plans: Vec<Plan>,
    groups: Vec<ColumnGroup>,
    n_cols: usize,
    protected: usize,
    label: usize,
}

impl Encoder {
    pub fn fit(dataset: &Dataset, fit_rows: &[usize], mode: NumericMode) -> Result<Self, DataError> {
        if fit_rows.is_empty() {
            return Err(DataError::Empty);
        }
        if let NumericMode::Binned { n_bins } = mode {
            if n_bins < 2 {
                return Err(DataError::Schema(format!("n_bins must be >= 2, got {n_bins}")));
            }
        }
        let schema = dataset.schema();
        let mut plans = Vec::with_capacity(schema.len());
        let mut groups = Vec::with_capacity(schema.len());
        let mut start = 0;
        for (a, attr) in schema.attributes().iter().enumerate() {
            let (plan, encoding, width, levels, level_values, bin_edges) = match (&attr.kind, mode) {
                (AttributeKind::Categorical { values }, _) => {
                    let n = values.len();
                    let enc = if n == 2 {
                        GroupEncoding::Binary
                    } else {
                        GroupEncoding::OneHot
                    };
                    let width = if n == 2 { 1 } else { n };
                    (Plan::Levels, enc, width, values.clone(), None, None)
                }
                (AttributeKind::Discrete { values }, NumericMode::Binned { .. }) => {
                    let n = values.len();
                    let enc = if n == 2 {
                        GroupEncoding::Binary
                    } else {
                        GroupEncoding::OneHot
                    };
                    let width = if n == 2 { 1 } else { n };
                    let lv: Vec<f64> = values.iter().map(|&v| v as f64).collect();
                    (
                        Plan::Levels,
                        enc,
                        width,
                        values.iter().map(|v| v.to_string()).collect(),
                        Some(lv),
                        None,
                    )
                }
                (AttributeKind::Continuous, NumericMode::Binned { n_bins }) => {
                    let col: Vec<f64> = fit_rows.iter().map(|&r| dataset.numeric(r, a).unwrap()).collect();
                    let min = col.iter().copied().fold(f64::INFINITY, f64::min);
                    let max = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    if !(max > min) {
                        return Err(DataError::DegenerateContinuous(attr.name.clone()));
                    }
                    let w = (max - min) / n_bins as f64;
                    let edges: Vec<f64> = (0..=n_bins)
                        .map(|i| if i == n_bins { max } else { min + w * i as f64 })
                        .collect();
                    let mids: Vec<f64> = (0..n_bins).map(|i| 0.5 * (edges[i] + edges[i + 1])).collect();
                    let enc = if n_bins == 2 {
                        GroupEncoding::Binary
                    } else {
                        GroupEncoding::OneHot
                    };
                    let width = if n_bins == 2 { 1 } else { n_bins };
                    let labels = (0..n_bins)
                        .map(|i| format!("[{},{})", edges[i], edges[i + 1]))
                        .collect();
                    (
                        Plan::Bins { min, max, n_bins },
                        enc,
                        width,
                        labels,
                        Some(mids),
                        Some(edges),
                    )
                }
                (_, NumericMode::Raw) => (Plan::Raw, GroupEncoding::Numeric, 1, Vec::new(), None, None),
            };
            groups.push(ColumnGroup {
                attribute: a,
                name: attr.name.clone(),
                start,
                width,
                encoding,
                levels,
                level_values,
                bin_edges,
                categorical: attr.kind.is_categorical(),
            });
            start += width;
            plans.push(plan);
        }
        Ok(Self {
            plans,
            groups,
            n_cols: start,
            protected: schema.protected(),
            label: schema.label(),
        })
    }

    pub fn groups(&self) -> &[ColumnGroup] {
        &self.groups
    }

    /// Encodes every row of `dataset` (which must share the fitted schema).
    pub fn transform(&self, dataset: &Dataset) -> EncodedMatrix {
        let n = dataset.len();
        let mut m = Matrix::zeros(n, self.n_cols);
        for r in 0..n {
            let row = m.row_mut(r);
            for (a, (plan, g)) in self.plans.iter().zip(&self.groups).enumerate() {
                match plan {
                    Plan::Levels => {
                        let level = dataset.level(r, a).expect("level attribute");
                        set_level(row, g, level);
                    }
                    Plan::Bins { min, max, n_bins } => {
                        let v = dataset.numeric(r, a).unwrap();
                        set_level(row, g, bin_of(v, *min, *max, *n_bins));
                    }
                    Plan::Raw => {
                        row[g.start] = match dataset.numeric(r, a) {
                            Some(v) => v,
                            None => dataset.level(r, a).unwrap() as f64,
                        };
                    }
                }
            }
        }
        EncodedMatrix {
            matrix: m,
            groups: self.groups.clone(),
            protected_group: Some(self.protected),
            label_group: Some(self.label),
        }
    }
}

fn set_level(row: &mut [f64], g: &ColumnGroup, level: usize) {
    match g.encoding {
        GroupEncoding::Binary => row[g.start] = level as f64,
        GroupEncoding::OneHot => row[g.start + level] = 1.0,
        GroupEncoding::Numeric => row[g.start] = level as f64,
    }
}

/// Equal-width bin index over `[min, max]`; values outside clamp to the end bins.
fn bin_of(v: f64, min: f64, max: f64, n_bins: usize) -> usize {
    let pos = ((v - min) * n_bins as f64 / (max - min)).floor();
    if pos.is_nan() || pos < 0.0 {
        0
    } else {
        (pos as usize).min(n_bins - 1)
    }
}

/// Fully discrete encoding fitted on all rows.
pub fn encode(dataset: &Dataset, n_bins: usize) -> Result<EncodedMatrix, DataError> {
    let rows: Vec<usize> = (0..dataset.len()).collect();
    Ok(Encoder::fit(dataset, &rows, NumericMode::Binned { n_bins })?.transform(dataset))
}

/// Design encoding for classifiers: one-hot categoricals, raw numerics.
pub fn encode_design(dataset: &Dataset) -> EncodedMatrix {
    let rows: Vec<usize> = (0..dataset.len()).collect();
    Encoder::fit(dataset, &rows, NumericMode::Raw)
        .expect("raw encoding cannot fail on a non-empty dataset")
        .transform(dataset)
}
