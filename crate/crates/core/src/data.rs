//! Datasets, CSV ingestion and the partition/label/split plumbing of the test.
//!
//! A [`Dataset`] stores rows in row-major order with the column layout
//! `[X | Y | Z]`. All operations here are pure functions of their inputs and
//! an explicit seed.

use std::collections::BTreeMap;
use std::ops::Range;
use std::path::Path;

use rand::seq::SliceRandom;

use crate::seed;
use crate::{Error, Result};

/// Widths of the X, Y and Z blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct DimSpec {
    pub dx: usize,
    pub dy: usize,
    pub dz: usize,
}

impl DimSpec {
    pub fn new(dx: usize, dy: usize, dz: usize) -> Result<Self> {
        if dx == 0 || dy == 0 || dz == 0 {
            return Err(Error::InvalidParam(format!(
                "every block needs at least one column, got ({dx}, {dy}, {dz})"
            )));
        }
        Ok(DimSpec { dx, dy, dz })
    }

    pub fn width(&self) -> usize {
        self.dx + self.dy + self.dz
    }

    pub fn x_cols(&self) -> Range<usize> {
        0..self.dx
    }

    pub fn y_cols(&self) -> Range<usize> {
        self.dx..self.dx + self.dy
    }

    pub fn z_cols(&self) -> Range<usize> {
        self.dx + self.dy..self.width()
    }
}

fn check_finite(values: &[f64], width: usize) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(pos) => Err(Error::NonFinite {
            row: pos / width,
            column: pos % width,
        }),
        None => Ok(()),
    }
}

/// An `n × (dx + dy + dz)` matrix of finite reals laid out as `[X | Y | Z]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    values: Vec<f64>,
    dims: DimSpec,
}

impl Dataset {
    /// Builds a dataset from row-major values.
    pub fn new(values: Vec<f64>, dims: DimSpec) -> Result<Self> {
        let width = dims.width();
        if values.len() % width != 0 {
            return Err(Error::DimMismatch(format!(
                "{} values do not fill rows of width {width}",
                values.len()
            )));
        }
        check_finite(&values, width)?;
        Ok(Dataset { values, dims })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R], dims: DimSpec) -> Result<Self> {
        let width = dims.width();
        let mut values = Vec::with_capacity(rows.len() * width);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != width {
                return Err(Error::DimMismatch(format!(
                    "row {i} has {} values, expected {width}",
                    row.len()
                )));
            }
            values.extend_from_slice(row);
        }
        Self::new(values, dims)
    }

    pub fn empty(dims: DimSpec) -> Self {
        Dataset {
            values: Vec::new(),
            dims,
        }
    }

    pub fn dims(&self) -> DimSpec {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.dims.width()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let w = self.dims.width();
        &self.values[i * w..(i + 1) * w]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.dims.width())
    }

    pub fn x(&self, i: usize) -> &[f64] {
        &self.row(i)[self.dims.x_cols()]
    }

    pub fn y(&self, i: usize) -> &[f64] {
        &self.row(i)[self.dims.y_cols()]
    }

    pub fn z(&self, i: usize) -> &[f64] {
        &self.row(i)[self.dims.z_cols()]
    }

    /// Row-major copy of the Z block.
    pub fn z_block(&self) -> Vec<f64> {
        self.rows().flat_map(|r| &r[self.dims.z_cols()]).copied().collect()
    }

    /// New dataset made of the given rows, in the given order.
    pub fn select(&self, indices: &[usize]) -> Dataset {
        let mut values = Vec::with_capacity(indices.len() * self.dims.width());
        for &i in indices {
            values.extend_from_slice(self.row(i));
        }
        Dataset {
            values,
            dims: self.dims,
        }
    }
}

/// Feature rows with binary labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    features: Vec<f64>,
    width: usize,
    labels: Vec<u8>,
}

impl LabeledDataset {
    pub fn new(features: Vec<f64>, width: usize, labels: Vec<u8>) -> Result<Self> {
        if width == 0 {
            return Err(Error::InvalidParam("feature width must be positive".into()));
        }
        if features.len() != width * labels.len() {
            return Err(Error::DimMismatch(format!(
                "{} feature values for {} labels of width {width}",
                features.len(),
                labels.len()
            )));
        }
        if let Some(bad) = labels.iter().find(|&&l| l > 1) {
            return Err(Error::InvalidParam(format!("label {bad} is not 0 or 1")));
        }
        check_finite(&features, width)?;
        Ok(LabeledDataset {
            features,
            width,
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.width..(i + 1) * self.width]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.features.chunks_exact(self.width)
    }

    /// `(count of label 0, count of label 1)`.
    pub fn class_counts(&self) -> (usize, usize) {
        let ones = self.labels.iter().filter(|&&l| l == 1).count();
        (self.labels.len() - ones, ones)
    }

    pub fn select(&self, indices: &[usize]) -> LabeledDataset {
        let mut features = Vec::with_capacity(indices.len() * self.width);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            features.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        LabeledDataset {
            features,
            width: self.width,
            labels,
        }
    }

    /// Keeps only `columns`, in that order. Labels and row order are unchanged.
    pub fn project(&self, columns: &[usize]) -> Result<LabeledDataset> {
        if columns.is_empty() {
            return Err(Error::InvalidParam("projection needs at least one column".into()));
        }
        if let Some(&c) = columns.iter().find(|&&c| c >= self.width) {
            return Err(Error::DimMismatch(format!(
                "column {c} out of range for width {}",
                self.width
            )));
        }
        let features = self
            .rows()
            .flat_map(|r| columns.iter().map(move |&c| r[c]))
            .collect();
        Ok(LabeledDataset {
            features,
            width: columns.len(),
            labels: self.labels.clone(),
        })
    }
}

/// Three equal, disjoint random parts of a dataset.
#[derive(Debug, Clone)]
pub struct Partition3 {
    pub u1: Dataset,
    pub u2: Dataset,
    pub u3: Dataset,
    /// Rows dropped so the parts have equal size (`n mod 3`).
    pub discarded: usize,
    /// Source row indices of `u1`, `u2` and `u3`.
    pub indices: [Vec<usize>; 3],
}

/// Shuffles the rows with the seeded RNG and cuts them into three parts of
/// `⌊n/3⌋` rows. The trailing `n mod 3` shuffled rows are discarded.
pub fn partition3(ds: &Dataset, seed: u64) -> Result<Partition3> {
    let n = ds.len();
    if n < 3 {
        return Err(Error::TooFewRows { needed: 3, got: n });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut seed::rng(seed, seed::stream::PARTITION));
    let m = n / 3;
    let indices = [
        order[..m].to_vec(),
        order[m..2 * m].to_vec(),
        order[2 * m..3 * m].to_vec(),
    ];
    Ok(Partition3 {
        u1: ds.select(&indices[0]),
        u2: ds.select(&indices[1]),
        u3: ds.select(&indices[2]),
        discarded: n - 3 * m,
        indices,
    })
}

/// Rows of `u1` labeled 1 followed by rows of `u2_prime` labeled 0.
pub fn make_labeled(u1: &Dataset, u2_prime: &Dataset) -> Result<LabeledDataset> {
    if u1.dims() != u2_prime.dims() {
        return Err(Error::DimMismatch(format!(
            "{:?} vs {:?}",
            u1.dims(),
            u2_prime.dims()
        )));
    }
    if u1.len() != u2_prime.len() {
        return Err(Error::DimMismatch(format!(
            "{} original rows vs {} bootstrapped rows",
            u1.len(),
            u2_prime.len()
        )));
    }
    let mut features = Vec::with_capacity(u1.values().len() * 2);
    features.extend_from_slice(u1.values());
    features.extend_from_slice(u2_prime.values());
    let mut labels = vec![1u8; u1.len()];
    labels.resize(2 * u1.len(), 0);
    Ok(LabeledDataset {
        features,
        width: u1.dims().width(),
        labels,
    })
}

/// Stratified 50/50 split. Each half receives half of each class; when both
/// class counts are odd the training half takes the extra label-1 row and the
/// test half the extra label-0 row, so the halves still have equal size.
/// Rows keep their relative order within each half.
pub fn split_train_test(d: &LabeledDataset, seed: u64) -> Result<(LabeledDataset, LabeledDataset)> {
    if d.len() % 2 != 0 {
        return Err(Error::InvalidParam(format!(
            "cannot split {} rows into equal halves",
            d.len()
        )));
    }
    let mut rng = seed::rng(seed, seed::stream::SPLIT);
    let mut train = Vec::with_capacity(d.len() / 2);
    let mut test = Vec::with_capacity(d.len() / 2);
    for class in [1u8, 0u8] {
        let mut idx: Vec<usize> = (0..d.len()).filter(|&i| d.labels[i] == class).collect();
        idx.shuffle(&mut rng);
        let take = if class == 1 { idx.len().div_ceil(2) } else { idx.len() / 2 };
        train.extend_from_slice(&idx[..take]);
        test.extend_from_slice(&idx[take..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((d.select(&train), d.select(&test)))
}

/// Removes the X block, keeping `[Y | Z]` features.
pub fn drop_x(d: &LabeledDataset, dims: DimSpec) -> Result<LabeledDataset> {
    if d.width() != dims.width() {
        return Err(Error::DimMismatch(format!(
            "feature width {} does not match {:?}",
            d.width(),
            dims
        )));
    }
    let keep: Vec<usize> = (dims.dx..dims.width()).collect();
    d.project(&keep)
}

/// One item of a block assignment: a header name, a zero-based index, or an
/// inclusive index range `a..b`.
#[derive(Debug, Clone, PartialEq, Eq)]
enum ColRef {
    Name(String),
    Index(usize),
    Range(usize, usize),
}

/// Column list for one block, as written on the command line (`"z1,z2"` or `"2..4"`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockSpec(Vec<ColRef>);

impl BlockSpec {
    pub fn parse(s: &str) -> Result<Self> {
        let mut refs = Vec::new();
        for item in s.split(',').map(str::trim) {
            if item.is_empty() {
                return Err(Error::ColSpec(format!("empty column in {s:?}")));
            }
            let r = match item.split_once("..") {
                Some((a, b)) => match (a.trim().parse(), b.trim().parse()) {
                    (Ok(a), Ok(b)) if a <= b => ColRef::Range(a, b),
                    (Ok(a), Ok(b)) => {
                        return Err(Error::ColSpec(format!("range {a}..{b} is reversed")))
                    }
                    _ => ColRef::Name(item.to_string()),
                },
                None => match item.parse() {
                    Ok(i) => ColRef::Index(i),
                    Err(_) => ColRef::Name(item.to_string()),
                },
            };
            refs.push(r);
        }
        Ok(BlockSpec(refs))
    }

    /// Resolves against a header. Names take precedence over numeric indices
    /// so a column literally named `"3"` is addressable by name.
    fn resolve(&self, header: &[String]) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        for r in &self.0 {
            match r {
                ColRef::Name(name) => out.push(find_column(header, name)?),
                ColRef::Index(i) => match header.iter().position(|h| h == &i.to_string()) {
                    Some(pos) => out.push(pos),
                    None => out.push(check_index(header, *i)?),
                },
                ColRef::Range(a, b) => {
                    for i in *a..=*b {
                        out.push(check_index(header, i)?);
                    }
                }
            }
        }
        Ok(out)
    }
}

fn find_column(header: &[String], name: &str) -> Result<usize> {
    header
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| Error::MissingColumn(name.to_string()))
}

fn check_index(header: &[String], i: usize) -> Result<usize> {
    if i < header.len() {
        Ok(i)
    } else {
        Err(Error::ColSpec(format!(
            "column index {i} out of range ({} columns)",
            header.len()
        )))
    }
}

/// Assignment of CSV columns to the X, Y and Z blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColSpec {
    pub x: BlockSpec,
    pub y: BlockSpec,
    pub z: BlockSpec,
}

impl ColSpec {
    pub fn parse(x: &str, y: &str, z: &str) -> Result<Self> {
        Ok(ColSpec {
            x: BlockSpec::parse(x)?,
            y: BlockSpec::parse(y)?,
            z: BlockSpec::parse(z)?,
        })
    }

    /// Column indices for `[X | Y | Z]` plus the resulting dims.
    fn resolve(&self, header: &[String]) -> Result<(Vec<usize>, DimSpec)> {
        let x = self.x.resolve(header)?;
        let y = self.y.resolve(header)?;
        let z = self.z.resolve(header)?;
        let mut owner = BTreeMap::new();
        for &c in x.iter().chain(&y).chain(&z) {
            if owner.insert(c, ()).is_some() {
                return Err(Error::OverlappingAssignment(header[c].clone()));
            }
        }
        let dims = DimSpec::new(x.len(), y.len(), z.len())?;
        Ok(([x, y, z].concat(), dims))
    }
}

fn open_csv(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new().has_headers(true).from_reader(file))
}

fn parse_cell(raw: &str, row: usize, column: &str) -> Result<f64> {
    match raw.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::Cell {
            row,
            column: column.to_string(),
            value: raw.to_string(),
        }),
    }
}

/// Reads a headed CSV and reorders the assigned columns into `[X | Y | Z]`.
/// Unassigned columns are ignored and never parsed. Row numbers in errors
/// count data rows from 1.
pub fn load_csv(path: impl AsRef<Path>, colspec: &ColSpec) -> Result<Dataset> {
    let mut reader = open_csv(path.as_ref())?;
    let header: Vec<String> = reader.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let (columns, dims) = colspec.resolve(&header)?;
    let mut values = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        for &c in &columns {
            let raw = record.get(c).unwrap_or("");
            values.push(parse_cell(raw, i + 1, &header[c])?);
        }
    }
    Dataset::new(values, dims)
}

/// A numeric table with named columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    names: Vec<String>,
    values: Vec<f64>,
}

impl Table {
    pub fn new(names: Vec<String>, values: Vec<f64>) -> Result<Self> {
        if names.is_empty() {
            return Err(Error::Empty("table has no columns"));
        }
        if values.len() % names.len() != 0 {
            return Err(Error::DimMismatch(format!(
                "{} values do not fill rows of width {}",
                values.len(),
                names.len()
            )));
        }
        check_finite(&values, names.len())?;
        Ok(Table { names, values })
    }

    /// Reads a headed CSV in which every cell is a finite number.
    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let mut reader = open_csv(path.as_ref())?;
        let names: Vec<String> = reader.headers()?.iter().map(|h| h.trim().to_string()).collect();
        let mut values = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let record = record?;
            for (c, name) in names.iter().enumerate() {
                values.push(parse_cell(record.get(c).unwrap_or(""), i + 1, name)?);
            }
        }
        Table::new(names, values)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        find_column(&self.names, name)
    }

    /// Writes the table as a headed CSV. Values use the shortest decimal form
    /// that reads back to the same `f64`.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = csv::Writer::from_writer(file);
        w.write_record(&self.names)?;
        for row in self.values.chunks_exact(self.names.len()) {
            w.write_record(row.iter().map(|v| v.to_string()))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    /// Copies the given columns, in order, into a dataset with `dims`.
    pub fn to_dataset(&self, columns: &[usize], dims: DimSpec) -> Result<Dataset> {
        if columns.len() != dims.width() {
            return Err(Error::DimMismatch(format!(
                "{} columns for {:?}",
                columns.len(),
                dims
            )));
        }
        let width = self.names.len();
        let values = self
            .values
            .chunks_exact(width)
            .flat_map(|r| columns.iter().map(move |&c| r[c]))
            .collect();
        Dataset::new(values, dims)
    }
}
