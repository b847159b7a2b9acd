//! Tabular data ingestion, encoding, splitting and scaling.
//!
//! A [`Dataset`] is validated against a [`Schema`] on construction. Encoders
//! turn it into an [`EncodedMatrix`]: the fully discrete view (one-hot and
//! binned) fed to structure learning, or the design view (one-hot categoricals,
//! raw numerics) fed to the classifiers.

mod encode;
mod schema;
mod split;

use std::path::Path;

use thiserror::Error;

pub use encode::{encode, encode_design, ColumnGroup, EncodedMatrix, Encoder, GroupEncoding, NumericMode};
pub use schema::{AttributeKind, AttributeSchema, Role, Schema};
pub use split::{scale_unit_interval, split, SplitPlan, UnitScaler};

#[derive(Debug, Error)]
pub enum DataError {
    #[error("missing or unreadable file: {0}")]
    MissingFile(String),
    #[error("line {line}: expected {expected} fields, found {found}")]
    ArityMismatch { line: usize, expected: usize, found: usize },
    #[error("line {line}: attribute {attribute}: unknown value {value:?}")]
    UnknownCategory {
        line: usize,
        attribute: String,
        value: String,
    },
    #[error("line {line}: attribute {attribute}: not a number: {value:?}")]
    NonNumeric {
        line: usize,
        attribute: String,
        value: String,
    },
    #[error("continuous attribute {0} is constant on the fitting rows")]
    DegenerateContinuous(String),
    #[error("invalid test fraction {0}")]
    InvalidFraction(f64),
    #[error("k = {k} folds is too large for {available} non-test rows")]
    KTooLarge { k: usize, available: usize },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("dataset has no rows")]
    Empty,
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

/// One cell of a dataset row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    /// Index into a categorical or discrete attribute's value list.
    Level(usize),
    /// A continuous value.
    Real(f64),
}

/// Column storage: level indices for discrete kinds, reals for continuous.
#[derive(Debug, Clone, PartialEq)]
enum Column {
    Levels(Vec<usize>),
    Reals(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    schema: Schema,
    columns: Vec<Column>,
    n_rows: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct CsvOptions {
    pub delimiter: u8,
    pub has_header: bool,
}

impl Default for CsvOptions {
    fn default() -> Self {
        Self {
            delimiter: b',',
            has_header: false,
        }
    }
}

impl Dataset {
    /// Builds a dataset from rows of cells, checking every cell against the schema.
    pub fn from_rows(schema: Schema, rows: &[Vec<Cell>]) -> Result<Self, DataError> {
        if rows.is_empty() {
            return Err(DataError::Empty);
        }
        let mut columns: Vec<Column> = schema
            .attributes()
            .iter()
            .map(|a| match a.kind {
                AttributeKind::Continuous => Column::Reals(Vec::with_capacity(rows.len())),
                _ => Column::Levels(Vec::with_capacity(rows.len())),
            })
            .collect();
        for (line, row) in rows.iter().enumerate() {
            if row.len() != schema.len() {
                return Err(DataError::ArityMismatch {
                    line: line + 1,
                    expected: schema.len(),
                    found: row.len(),
                });
            }
            for (j, (cell, col)) in row.iter().zip(columns.iter_mut()).enumerate() {
                let attr = schema.attribute(j);
                match (cell, col) {
                    (Cell::Level(l), Column::Levels(v)) => {
                        let size = attr.kind.domain_size().unwrap_or(0);
                        if *l >= size {
                            return Err(DataError::UnknownCategory {
                                line: line + 1,
                                attribute: attr.name.clone(),
                                value: l.to_string(),
                            });
                        }
                        v.push(*l);
                    }
                    (Cell::Real(x), Column::Reals(v)) if x.is_finite() => v.push(*x),
                    (cell, _) => {
                        return Err(DataError::NonNumeric {
                            line: line + 1,
                            attribute: attr.name.clone(),
                            value: format!("{cell:?}"),
                        })
                    }
                }
            }
        }
        Ok(Self {
            schema,
            columns,
            n_rows: rows.len(),
        })
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn len(&self) -> usize {
        self.n_rows
    }

    pub fn is_empty(&self) -> bool {
        self.n_rows == 0
    }

    pub fn cell(&self, row: usize, attr: usize) -> Cell {
        match &self.columns[attr] {
            Column::Levels(v) => Cell::Level(v[row]),
            Column::Reals(v) => Cell::Real(v[row]),
        }
    }

    /// Level index of a categorical/discrete cell; `None` for continuous attributes.
    pub fn level(&self, row: usize, attr: usize) -> Option<usize> {
        match &self.columns[attr] {
            Column::Levels(v) => Some(v[row]),
            Column::Reals(_) => None,
        }
    }

    /// Numeric value of a discrete or continuous cell; `None` for categorical attributes.
    pub fn numeric(&self, row: usize, attr: usize) -> Option<f64> {
        match (&self.schema.attribute(attr).kind, &self.columns[attr]) {
            (AttributeKind::Discrete { values }, Column::Levels(v)) => Some(values[v[row]] as f64),
            (AttributeKind::Continuous, Column::Reals(v)) => Some(v[row]),
            _ => None,
        }
    }

    /// Numeric column for discrete/continuous attributes.
    pub fn numeric_column(&self, attr: usize) -> Option<Vec<f64>> {
        if self.schema.attribute(attr).kind.is_categorical() {
            return None;
        }
        Some((0..self.n_rows).map(|r| self.numeric(r, attr).unwrap()).collect())
    }

    pub fn level_column(&self, attr: usize) -> Option<&[usize]> {
        match &self.columns[attr] {
            Column::Levels(v) => Some(v),
            Column::Reals(_) => None,
        }
    }

    /// Protected level of every row.
    pub fn protected_levels(&self) -> Vec<usize> {
        self.level_column(self.schema.protected())
            .expect("protected attribute must be categorical or discrete")
            .to_vec()
    }

    /// Human-readable value of a cell.
    pub fn display_value(&self, row: usize, attr: usize) -> String {
        match (&self.schema.attribute(attr).kind, self.cell(row, attr)) {
            (AttributeKind::Categorical { values }, Cell::Level(l)) => values[l].clone(),
            (AttributeKind::Discrete { values }, Cell::Level(l)) => values[l].to_string(),
            (_, Cell::Real(x)) => x.to_string(),
            (_, Cell::Level(l)) => l.to_string(),
        }
    }

    /// Level names of a categorical/discrete attribute.
    pub fn level_names(&self, attr: usize) -> Vec<String> {
        match &self.schema.attribute(attr).kind {
            AttributeKind::Categorical { values } => values.clone(),
            AttributeKind::Discrete { values } => values.iter().map(|v| v.to_string()).collect(),
            AttributeKind::Continuous => Vec::new(),
        }
    }

    /// Subset of rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Dataset {
        let columns = self
            .columns
            .iter()
            .map(|c| match c {
                Column::Levels(v) => Column::Levels(rows.iter().map(|&r| v[r]).collect()),
                Column::Reals(v) => Column::Reals(rows.iter().map(|&r| v[r]).collect()),
            })
            .collect();
        Dataset {
            schema: self.schema.clone(),
            columns,
            n_rows: rows.len(),
        }
    }
}

/// Parses one raw text field against its attribute schema.
fn parse_field(attr: &AttributeSchema, raw: &str, line: usize) -> Result<Cell, DataError> {
    let raw = attr.recode.get(raw).map(String::as_str).unwrap_or(raw);
    match &attr.kind {
        AttributeKind::Categorical { values } => {
            values
                .iter()
                .position(|v| v == raw)
                .map(Cell::Level)
                .ok_or_else(|| DataError::UnknownCategory {
                    line,
                    attribute: attr.name.clone(),
                    value: raw.to_string(),
                })
        }
        AttributeKind::Discrete { values } => {
            let v: i64 = raw.parse().map_err(|_| DataError::NonNumeric {
                line,
                attribute: attr.name.clone(),
                value: raw.to_string(),
            })?;
            values
                .iter()
                .position(|&x| x == v)
                .map(Cell::Level)
                .ok_or_else(|| DataError::UnknownCategory {
                    line,
                    attribute: attr.name.clone(),
                    value: raw.to_string(),
                })
        }
        AttributeKind::Continuous => {
            let v: f64 = raw.parse().map_err(|_| DataError::NonNumeric {
                line,
                attribute: attr.name.clone(),
                value: raw.to_string(),
            })?;
            if !v.is_finite() {
                return Err(DataError::NonNumeric {
                    line,
                    attribute: attr.name.clone(),
                    value: raw.to_string(),
                });
            }
            Ok(Cell::Real(v))
        }
    }
}

/// Reads delimited text into a validated dataset.
pub fn read_delimited<R: std::io::Read>(schema: Schema, reader: R, opts: CsvOptions) -> Result<Dataset, DataError> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(opts.delimiter)
        .has_headers(opts.has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut rows = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let line = i + 1 + usize::from(opts.has_header);
        if record.len() != schema.len() {
            return Err(DataError::ArityMismatch {
                line,
                expected: schema.len(),
                found: record.len(),
            });
        }
        let row = record
            .iter()
            .zip(schema.attributes())
            .map(|(field, attr)| parse_field(attr, field, line))
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        // An empty file has no line with the schema's arity.
        return Err(DataError::ArityMismatch {
            line: 1,
            expected: schema.len(),
            found: 0,
        });
    }
    Dataset::from_rows(schema, &rows)
}

pub fn load_csv(schema: Schema, path: &Path, opts: CsvOptions) -> Result<Dataset, DataError> {
    let file = std::fs::File::open(path).map_err(|_| DataError::MissingFile(path.display().to_string()))?;
    read_delimited(schema, std::io::BufReader::new(file), opts)
}

/// Writes a dataset back out as delimited text (no header unless requested).
pub fn write_delimited<W: std::io::Write>(dataset: &Dataset, writer: W, opts: CsvOptions) -> Result<(), DataError> {
    let mut w = csv::WriterBuilder::new().delimiter(opts.delimiter).from_writer(writer);
    if opts.has_header {
        w.write_record(dataset.schema().attributes().iter().map(|a| a.name.as_str()))?;
    }
    for r in 0..dataset.len() {
        w.write_record((0..dataset.schema().len()).map(|a| dataset.display_value(r, a)))?;
    }
    w.flush().map_err(|e| DataError::Csv(e.into()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_schema() -> Schema {
        Schema::new(vec![
            AttributeSchema::categorical("g", &["a", "b"], Role::Protected),
            AttributeSchema::continuous("x", Role::Feature),
            AttributeSchema::discrete("y", &[0, 1], Role::Label),
        ])
        .unwrap()
    }

    #[test]
    fn reads_hand_written_csv() {
        let text = "a,1.5,0\nb,2.5,1\na,-3,1\n";
        let ds = read_delimited(small_schema(), text.as_bytes(), CsvOptions::default()).unwrap();
        assert_eq!(ds.len(), 3);
        assert_eq!(ds.cell(1, 0), Cell::Level(1));
        assert_eq!(ds.cell(2, 1), Cell::Real(-3.0));
        assert_eq!(ds.numeric(1, 2), Some(1.0));
        let mut out = Vec::new();
        write_delimited(&ds, &mut out, CsvOptions::default()).unwrap();
        let again = read_delimited(small_schema(), out.as_slice(), CsvOptions::default()).unwrap();
        assert_eq!(again, ds);
    }

    #[test]
    fn header_row_is_skipped_when_flagged() {
        let text = "g,x,y\na,1,0\n";
        let opts = CsvOptions {
            has_header: true,
            ..CsvOptions::default()
        };
        let ds = read_delimited(small_schema(), text.as_bytes(), opts).unwrap();
        assert_eq!(ds.len(), 1);
    }

    #[test]
    fn empty_input_is_an_arity_error() {
        let err = read_delimited(small_schema(), "".as_bytes(), CsvOptions::default()).unwrap_err();
        assert!(matches!(err, DataError::ArityMismatch { line: 1, .. }));
    }

    #[test]
    fn missing_file() {
        let err = load_csv(
            small_schema(),
            Path::new("/definitely/not/here.csv"),
            CsvOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, DataError::MissingFile(_)));
    }

    #[test]
    fn rejects_bad_rows() {
        let err = read_delimited(small_schema(), "a,1\n".as_bytes(), CsvOptions::default()).unwrap_err();
        assert!(matches!(
            err,
            DataError::ArityMismatch {
                line: 1,
                expected: 3,
                found: 2
            }
        ));
        let err = read_delimited(small_schema(), "a,1,0\nc,1,0\n".as_bytes(), CsvOptions::default()).unwrap_err();
        match err {
            DataError::UnknownCategory { line, attribute, value } => {
                assert_eq!((line, attribute.as_str(), value.as_str()), (2, "g", "c"));
            }
            other => panic!("unexpected {other:?}"),
        }
        let err = read_delimited(small_schema(), "a,abc,0\n".as_bytes(), CsvOptions::default()).unwrap_err();
        assert!(matches!(err, DataError::NonNumeric { line: 1, .. }));
        let err = read_delimited(small_schema(), "a,1,7\n".as_bytes(), CsvOptions::default()).unwrap_err();
        assert!(matches!(err, DataError::UnknownCategory { .. }));
    }

    #[test]
    fn recode_collapses_raw_codes() {
        let mut attrs = vec![
            AttributeSchema::categorical("sex", &["female", "male"], Role::Protected),
            AttributeSchema::categorical("y", &["1", "2"], Role::Label),
        ];
        attrs[0].recode.insert("A91".into(), "male".into());
        attrs[0].recode.insert("A92".into(), "female".into());
        let schema = Schema::new(attrs).unwrap();
        let opts = CsvOptions {
            delimiter: b' ',
            has_header: false,
        };
        let ds = read_delimited(schema, "A91 1\nA92 2\n".as_bytes(), opts).unwrap();
        assert_eq!(ds.protected_levels(), vec![1, 0]);
    }
}
