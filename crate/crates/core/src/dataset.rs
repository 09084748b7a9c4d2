//! Tabular soil data: schema, CSV ingestion, cleaning, categorical encoding
//! and the seeded train/test split.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Numeric,
    Categorical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnRole {
    Feature,
    Target,
    Ignored,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSchema {
    pub name: String,
    pub kind: ColumnKind,
    pub role: ColumnRole,
    #[serde(default)]
    pub unit: String,
    /// Optional columns are skipped when the header lacks them.
    #[serde(default)]
    pub optional: bool,
}

impl ColumnSchema {
    pub fn feature(name: &str, unit: &str) -> Self {
        ColumnSchema {
            name: name.to_string(),
            kind: ColumnKind::Numeric,
            role: ColumnRole::Feature,
            unit: unit.to_string(),
            optional: false,
        }
    }

    pub fn categorical(name: &str) -> Self {
        ColumnSchema {
            kind: ColumnKind::Categorical,
            ..ColumnSchema::feature(name, "")
        }
    }

    pub fn target(name: &str) -> Self {
        ColumnSchema {
            role: ColumnRole::Target,
            ..ColumnSchema::feature(name, "")
        }
    }

    pub fn optional(mut self) -> Self {
        self.optional = true;
        self
    }

    pub fn is_active(&self) -> bool {
        self.role != ColumnRole::Ignored
    }
}

/// Name of the yield column in the canonical soil layout.
pub const YIELD_COLUMN: &str = "yield";

/// Canonical soil columns in header order, with units. `N` and `B` are optional.
pub const SOIL_COLUMNS: [(&str, &str, bool); 14] = [
    ("pH", "pH", false),
    ("EC", "dS/m", false),
    ("OC", "%", false),
    ("N", "kg/ha", true),
    ("P", "kg/ha", false),
    ("K", "kg/ha", false),
    ("Ca", "meq/100g", false),
    ("Mg", "meq/100g", false),
    ("S", "ppm", false),
    ("Zn", "ppm", false),
    ("Fe", "ppm", false),
    ("Mn", "ppm", false),
    ("Cu", "ppm", false),
    ("B", "ppm", true),
];

/// The canonical soil schema. With `with_target` the `yield` column is a
/// required target; otherwise it is an optional, ignored column so that
/// prediction files may carry it or not.
pub fn soil_schema(with_target: bool) -> Vec<ColumnSchema> {
    let mut schema: Vec<ColumnSchema> = SOIL_COLUMNS
        .iter()
        .map(|&(name, unit, optional)| ColumnSchema {
            optional,
            ..ColumnSchema::feature(name, unit)
        })
        .collect();
    let mut y = ColumnSchema::target(YIELD_COLUMN);
    if !with_target {
        y.role = ColumnRole::Ignored;
        y.optional = true;
    }
    schema.push(y);
    schema
}

/// Checks name uniqueness and the target-count rule. A training schema has
/// exactly one target; a prediction schema has none.
pub fn validate_schema(schema: &[ColumnSchema], training: bool) -> Result<()> {
    let mut seen = HashSet::new();
    for c in schema {
        if !seen.insert(c.name.as_str()) {
            return Err(Error::InvalidSchema(format!(
                "duplicate column `{}`",
                c.name
            )));
        }
    }
    let targets = schema
        .iter()
        .filter(|c| c.role == ColumnRole::Target)
        .count();
    match (training, targets) {
        (true, 1) | (false, 0) => Ok(()),
        (true, n) => Err(Error::InvalidSchema(format!(
            "training schema needs one target, found {n}"
        ))),
        (false, n) => Err(Error::InvalidSchema(format!(
            "prediction schema must have no target, found {n}"
        ))),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Number(f64),
    Token(String),
    Missing,
}

impl Cell {
    fn parse(raw: &str, kind: ColumnKind) -> Cell {
        let raw = raw.trim();
        if raw.is_empty() {
            return Cell::Missing;
        }
        match kind {
            ColumnKind::Numeric => match raw.parse::<f64>() {
                Ok(v) if v.is_finite() => Cell::Number(v),
                _ => Cell::Missing,
            },
            ColumnKind::Categorical => Cell::Token(raw.to_string()),
        }
    }

    pub fn as_number(&self) -> Option<f64> {
        match self {
            Cell::Number(v) => Some(*v),
            _ => None,
        }
    }

    pub fn is_missing(&self) -> bool {
        matches!(self, Cell::Missing)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Provenance {
    pub source: Option<PathBuf>,
    pub rows_read: usize,
    pub rows_dropped: usize,
}

/// Column-ordered table. Cells in numeric columns are `Number` or `Missing`,
/// cells in categorical columns are `Token` or `Missing`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    schema: Vec<ColumnSchema>,
    rows: Vec<Vec<Cell>>,
    provenance: Provenance,
}

impl Dataset {
    pub fn new(schema: Vec<ColumnSchema>, rows: Vec<Vec<Cell>>) -> Result<Self> {
        for r in &rows {
            if r.len() != schema.len() {
                return Err(Error::DimensionMismatch {
                    expected: schema.len(),
                    got: r.len(),
                });
            }
        }
        let provenance = Provenance {
            source: None,
            rows_read: rows.len(),
            rows_dropped: 0,
        };
        Ok(Dataset {
            schema,
            rows,
            provenance,
        })
    }

    /// Builds an all-numeric dataset from a matrix, one column per name.
    pub fn from_matrix(schema: Vec<ColumnSchema>, values: &Matrix) -> Result<Self> {
        if values.cols() != schema.len() {
            return Err(Error::DimensionMismatch {
                expected: schema.len(),
                got: values.cols(),
            });
        }
        let rows = values
            .iter_rows()
            .map(|r| r.iter().map(|&v| Cell::Number(v)).collect())
            .collect();
        Dataset::new(schema, rows)
    }

    pub fn schema(&self) -> &[ColumnSchema] {
        &self.schema
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.schema.len()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.schema.iter().position(|c| c.name == name)
    }

    pub fn feature_columns(&self) -> Vec<usize> {
        self.indices_with_role(ColumnRole::Feature)
    }

    pub fn target_column(&self) -> Option<usize> {
        self.indices_with_role(ColumnRole::Target).first().copied()
    }

    /// Feature and target columns, in schema order.
    pub fn active_columns(&self) -> Vec<usize> {
        (0..self.schema.len())
            .filter(|&j| self.schema[j].is_active())
            .collect()
    }

    fn indices_with_role(&self, role: ColumnRole) -> Vec<usize> {
        (0..self.schema.len())
            .filter(|&j| self.schema[j].role == role)
            .collect()
    }

    pub fn names(&self, columns: &[usize]) -> Vec<String> {
        columns
            .iter()
            .map(|&j| self.schema[j].name.clone())
            .collect()
    }

    /// Numeric matrix over the given columns; errors on any non-number cell.
    pub fn numeric_matrix(&self, columns: &[usize]) -> Result<Matrix> {
        let mut m = Matrix::zeros(self.rows.len(), columns.len());
        for (i, row) in self.rows.iter().enumerate() {
            for (k, &j) in columns.iter().enumerate() {
                m[(i, k)] = row[j]
                    .as_number()
                    .ok_or_else(|| Error::NonNumeric(self.schema[j].name.clone()))?;
            }
        }
        Ok(m)
    }

    pub fn target_values(&self) -> Result<Vec<f64>> {
        let j = self
            .target_column()
            .ok_or_else(|| Error::InvalidSchema("dataset has no target column".into()))?;
        Ok(self.numeric_matrix(&[j])?.as_slice().to_vec())
    }

    pub fn select_rows(&self, indices: &[usize]) -> Dataset {
        Dataset {
            schema: self.schema.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            provenance: self.provenance.clone(),
        }
    }
}

/// Loads a CSV file, selecting schema columns by header name.
pub fn load_csv(path: &Path, schema: &[ColumnSchema]) -> Result<Dataset> {
    load_csv_renamed(path, schema, &BTreeMap::new())
}

/// Like [`load_csv`], with `renames` mapping raw header names to schema names.
pub fn load_csv_renamed(
    path: &Path,
    schema: &[ColumnSchema],
    renames: &BTreeMap<String, String>,
) -> Result<Dataset> {
    let file = File::open(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::FileNotFound(path.to_path_buf()),
        _ => Error::Io(e),
    })?;
    let mut d = read_csv(file, &path.display().to_string(), schema, renames)?;
    d.provenance.source = Some(path.to_path_buf());
    Ok(d)
}

pub fn read_csv<R: Read>(
    reader: R,
    source_name: &str,
    schema: &[ColumnSchema],
    renames: &BTreeMap<String, String>,
) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::Headers)
        .from_reader(reader);
    let header: Vec<String> = rdr
        .headers()?
        .iter()
        .map(|h| renames.get(h).cloned().unwrap_or_else(|| h.to_string()))
        .collect();

    let mut kept = Vec::with_capacity(schema.len());
    let mut positions = Vec::with_capacity(schema.len());
    for col in schema {
        match header.iter().position(|h| *h == col.name) {
            Some(p) => {
                kept.push(col.clone());
                positions.push(p);
            }
            None if col.optional => {}
            None => {
                return Err(Error::HeaderMismatch {
                    column: col.name.clone(),
                    source_name: source_name.to_string(),
                })
            }
        }
    }

    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let row = kept
            .iter()
            .zip(&positions)
            .map(|(col, &p)| {
                record
                    .get(p)
                    .map_or(Cell::Missing, |raw| Cell::parse(raw, col.kind))
            })
            .collect();
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::EmptyInput(source_name.to_string()));
    }
    Dataset::new(kept, rows)
}

/// Shortest decimal string that parses back to the same `f64`.
pub fn format_number(v: f64) -> String {
    let mut buf = ryu::Buffer::new();
    buf.format(v).to_string()
}

pub fn write_csv<W: Write>(d: &Dataset, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(d.schema.iter().map(|c| c.name.as_str()))?;
    for row in &d.rows {
        w.write_record(row.iter().map(|c| match c {
            Cell::Number(v) => format_number(*v),
            Cell::Token(t) => t.clone(),
            Cell::Missing => String::new(),
        }))?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_csv(d: &Dataset, path: &Path) -> Result<()> {
    write_csv(d, File::create(path)?)
}

/// Keeps rows with no missing cell in any feature or target column.
pub fn drop_incomplete_rows(d: &Dataset) -> Result<Dataset> {
    let active = d.active_columns();
    let rows: Vec<Vec<Cell>> = d
        .rows
        .iter()
        .filter(|r| active.iter().all(|&j| !r[j].is_missing()))
        .cloned()
        .collect();
    let dropped = d.rows.len() - rows.len();
    if rows.is_empty() {
        return Err(Error::AllRowsDropped(d.provenance.rows_read));
    }
    let mut provenance = d.provenance.clone();
    provenance.rows_dropped += dropped;
    Ok(Dataset {
        schema: d.schema.clone(),
        rows,
        provenance,
    })
}

/// Ordinal codes per categorical column; a token's code is its index.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodingMap {
    pub columns: BTreeMap<String, Vec<String>>,
}

impl EncodingMap {
    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn code(&self, column: &str, token: &str) -> Result<usize> {
        self.columns
            .get(column)
            .and_then(|tokens| tokens.iter().position(|t| t == token))
            .ok_or_else(|| Error::UnseenCategory {
                column: column.to_string(),
                token: token.to_string(),
            })
    }

    /// Replaces tokens in every mapped column with their stored codes.
    pub fn apply(&self, d: &Dataset) -> Result<Dataset> {
        let mut out = d.clone();
        for column in self.columns.keys() {
            let Some(j) = d.column_index(column) else {
                continue;
            };
            for row in &mut out.rows {
                if let Cell::Token(t) = &row[j] {
                    row[j] = Cell::Number(self.code(column, t)? as f64);
                }
            }
            out.schema[j].kind = ColumnKind::Numeric;
        }
        Ok(out)
    }
}

/// Encodes each categorical column by first-appearance order (0, 1, ...).
pub fn encode_categoricals(d: &Dataset) -> (Dataset, EncodingMap) {
    let mut map = EncodingMap::default();
    for (j, col) in d.schema.iter().enumerate() {
        if col.kind != ColumnKind::Categorical {
            continue;
        }
        let mut tokens: Vec<String> = Vec::new();
        for row in &d.rows {
            if let Cell::Token(t) = &row[j] {
                if !tokens.contains(t) {
                    tokens.push(t.clone());
                }
            }
        }
        map.columns.insert(col.name.clone(), tokens);
    }
    let encoded = map
        .apply(d)
        .expect("every token is in a map built from the same data");
    (encoded, map)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    pub seed: u64,
    pub test_ratio: f64,
}

/// Seeded random partition of `0..n_rows`; both index lists are sorted.
pub fn split_indices(n_rows: usize, test_ratio: f64, seed: u64) -> Result<SplitIndices> {
    if !(test_ratio > 0.0 && test_ratio < 1.0) {
        return Err(Error::InvalidRatio(test_ratio));
    }
    if n_rows < 2 {
        return Err(Error::TooFewRows {
            needed: 2,
            got: n_rows,
        });
    }
    let n_test = ((test_ratio * n_rows as f64).round() as usize).clamp(1, n_rows - 1);
    let mut order: Vec<usize> = (0..n_rows).collect();
    order.shuffle(&mut rng::seeded(seed));
    let mut test = order[..n_test].to_vec();
    let mut train = order[n_test..].to_vec();
    test.sort_unstable();
    train.sort_unstable();
    Ok(SplitIndices {
        train,
        test,
        seed,
        test_ratio,
    })
}

pub fn train_test_split(d: &Dataset, test_ratio: f64, seed: u64) -> Result<SplitIndices> {
    split_indices(d.n_rows(), test_ratio, seed)
}

/// One row of soil measurements in canonical units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoilSample {
    pub ph: f64,
    pub ec: f64,
    pub oc: f64,
    pub n: Option<f64>,
    pub p: f64,
    pub k: f64,
    pub ca: f64,
    pub mg: f64,
    pub s: f64,
    pub zn: f64,
    pub fe: f64,
    pub mn: f64,
    pub cu: f64,
    pub b: Option<f64>,
    pub yield_label: Option<f64>,
}

impl SoilSample {
    pub fn validate(&self) -> std::result::Result<(), String> {
        let all = [
            self.ph, self.ec, self.oc, self.p, self.k, self.ca, self.mg, self.s, self.zn, self.fe,
            self.mn, self.cu,
        ];
        let optional = [self.n, self.b, self.yield_label];
        if all
            .iter()
            .chain(optional.iter().flatten())
            .any(|v| !v.is_finite())
        {
            return Err("non-finite measurement".into());
        }
        if !(0.0..=14.0).contains(&self.ph) {
            return Err(format!("pH {} outside [0, 14]", self.ph));
        }
        if all[1..]
            .iter()
            .chain([self.n, self.b].iter().flatten())
            .any(|&v| v < 0.0)
        {
            return Err("negative nutrient concentration".into());
        }
        if self.yield_label.is_some_and(|y| y < 0.0) {
            return Err("negative yield".into());
        }
        Ok(())
    }
}

/// Reads canonical soil samples out of a cleaned dataset.
pub fn soil_samples(d: &Dataset) -> Result<Vec<SoilSample>> {
    let idx = |name: &str| d.column_index(name);
    let required = |name: &str| {
        idx(name).ok_or_else(|| Error::HeaderMismatch {
            column: name.to_string(),
            source_name: "dataset".into(),
        })
    };
    let cols: Vec<usize> = [
        "pH", "EC", "OC", "P", "K", "Ca", "Mg", "S", "Zn", "Fe", "Mn", "Cu",
    ]
    .iter()
    .map(|n| required(n))
    .collect::<Result<_>>()?;
    let (n_col, b_col, y_col) = (idx("N"), idx("B"), idx(YIELD_COLUMN));

    d.rows
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let get = |j: usize| {
                row[j].as_number().ok_or_else(|| Error::InvalidSample {
                    row: i,
                    reason: format!("`{}` is missing", d.schema[j].name),
                })
            };
            let opt = |j: Option<usize>| j.and_then(|j| row[j].as_number());
            let v: Vec<f64> = cols.iter().map(|&j| get(j)).collect::<Result<_>>()?;
            let sample = SoilSample {
                ph: v[0],
                ec: v[1],
                oc: v[2],
                n: opt(n_col),
                p: v[3],
                k: v[4],
                ca: v[5],
                mg: v[6],
                s: v[7],
                zn: v[8],
                fe: v[9],
                mn: v[10],
                cu: v[11],
                b: opt(b_col),
                yield_label: opt(y_col),
            };
            sample
                .validate()
                .map_err(|reason| Error::InvalidSample { row: i, reason })?;
            Ok(sample)
        })
        .collect()
}
