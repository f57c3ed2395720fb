//! Labeled point sets, their validation, and the Euclidean metric.
//!
//! A [`Dataset`] is immutable once built. Point indices are the input row
//! order and serve as stable identifiers everywhere else in the crate.

use std::collections::HashMap;
use std::fmt;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Opaque categorical class label.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClassId(pub String);

impl ClassId {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ClassId {
    fn from(s: &str) -> Self {
        ClassId(s.to_owned())
    }
}

impl From<String> for ClassId {
    fn from(s: String) -> Self {
        ClassId(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPoint {
    pub coords: Vec<f64>,
    pub class_id: ClassId,
}

impl LabeledPoint {
    pub fn new(coords: Vec<f64>, class_id: impl Into<ClassId>) -> Self {
        LabeledPoint {
            coords,
            class_id: class_id.into(),
        }
    }
}

/// Serialization format of a labeled point file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    /// Guess the format from a file extension; anything but `.json` is CSV.
    pub fn from_path(path: &std::path::Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => Format::Json,
            _ => Format::Csv,
        }
    }
}

/// Which CSV column holds the class label.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum LabelColumn {
    #[default]
    Last,
    Index(usize),
    Name(String),
}

impl std::str::FromStr for LabelColumn {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s.parse::<usize>() {
            Ok(i) => LabelColumn::Index(i),
            Err(_) => LabelColumn::Name(s.to_owned()),
        })
    }
}

#[derive(Debug, Clone)]
pub struct Dataset {
    points: Vec<LabeledPoint>,
    dim: usize,
    /// Distinct classes in order of first appearance.
    classes: Vec<ClassId>,
    /// Class index of every point, into `classes`.
    labels: Vec<usize>,
    /// Point indices of every class, ascending.
    members: Vec<Vec<usize>>,
}

impl Dataset {
    /// Validate and index a list of points.
    ///
    /// The dimensionality is taken from the first point. Errors report
    /// 1-based row numbers.
    pub fn new(points: Vec<LabeledPoint>) -> Result<Dataset> {
        let first = points.first().ok_or(Error::EmptyInput)?;
        let dim = first.coords.len();
        if dim == 0 {
            return Err(Error::Format("points have no features".into()));
        }

        let mut classes: Vec<ClassId> = Vec::new();
        let mut class_lookup: HashMap<&ClassId, usize> = HashMap::new();
        let mut labels = Vec::with_capacity(points.len());
        let mut seen: HashMap<Vec<u64>, usize> = HashMap::new();

        for (i, p) in points.iter().enumerate() {
            if p.coords.len() != dim {
                return Err(Error::DimensionMismatch {
                    row: i + 1,
                    expected: dim,
                    found: p.coords.len(),
                });
            }
            if let Some(column) = p.coords.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite { row: i + 1, column });
            }
            let label = *class_lookup.entry(&p.class_id).or_insert_with(|| {
                classes.push(p.class_id.clone());
                classes.len() - 1
            });
            labels.push(label);

            // +0.0 and -0.0 are the same location
            let key: Vec<u64> = p.coords.iter().map(|v| (v + 0.0).to_bits()).collect();
            match seen.get(&key) {
                Some(&j) if labels[j] != label => {
                    return Err(Error::ContradictoryLabels {
                        first: j + 1,
                        second: i + 1,
                    });
                }
                Some(_) => {}
                None => {
                    seen.insert(key, i);
                }
            }
        }

        let mut members = vec![Vec::new(); classes.len()];
        for (i, &c) in labels.iter().enumerate() {
            members[c].push(i);
        }

        Ok(Dataset {
            points,
            dim,
            classes,
            labels,
            members,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[LabeledPoint] {
        &self.points
    }

    pub fn coords(&self, i: usize) -> &[f64] {
        &self.points[i].coords
    }

    pub fn class_id(&self, i: usize) -> &ClassId {
        &self.points[i].class_id
    }

    /// Class index of point `i` into [`Dataset::classes`].
    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn classes(&self) -> &[ClassId] {
        &self.classes
    }

    pub fn class_index(&self, class: &ClassId) -> Option<usize> {
        self.classes.iter().position(|c| c == class)
    }

    /// Indices of the points belonging to class index `c`.
    pub fn members(&self, c: usize) -> &[usize] {
        &self.members[c]
    }

    pub fn is_single_class(&self) -> bool {
        self.classes.len() < 2
    }

    /// Reorder rows: row `k` of the result is row `order[k]` of `self`.
    pub fn permuted(&self, order: &[usize]) -> Result<Dataset> {
        if order.len() != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                found: order.len(),
            });
        }
        Dataset::new(order.iter().map(|&i| self.points[i].clone()).collect())
    }

    /// Per-feature z-score normalization. Constant features are only centered.
    pub fn normalized(&self) -> (Dataset, Normalizer) {
        let n = self.len() as f64;
        let mut means = vec![0.0; self.dim];
        for p in &self.points {
            for (m, v) in means.iter_mut().zip(&p.coords) {
                *m += v;
            }
        }
        means.iter_mut().for_each(|m| *m /= n);
        let mut scales = vec![0.0; self.dim];
        for p in &self.points {
            for ((s, v), m) in scales.iter_mut().zip(&p.coords).zip(&means) {
                *s += (v - m) * (v - m);
            }
        }
        for s in scales.iter_mut() {
            *s = (*s / n).sqrt();
            if *s == 0.0 || !s.is_finite() {
                *s = 1.0;
            }
        }
        let normalizer = Normalizer { means, scales };
        let points = self
            .points
            .iter()
            .map(|p| LabeledPoint {
                coords: normalizer.forward(&p.coords),
                class_id: p.class_id.clone(),
            })
            .collect();
        let ds = Dataset {
            points,
            dim: self.dim,
            classes: self.classes.clone(),
            labels: self.labels.clone(),
            members: self.members.clone(),
        };
        (ds, normalizer)
    }
}

/// Affine per-feature map produced by [`Dataset::normalized`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
}

impl Normalizer {
    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.means.iter().zip(&self.scales))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }

    pub fn inverse(&self, z: &[f64]) -> Vec<f64> {
        z.iter()
            .zip(self.means.iter().zip(&self.scales))
            .map(|(v, (m, s))| v * s + m)
            .collect()
    }
}

/// Euclidean distance between two vectors of equal length.
pub fn distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    Ok(euclidean(a, b))
}

/// Unchecked Euclidean distance. `euclidean(a, b)` and `euclidean(b, a)` are
/// bit-identical since `(a - b)^2 == (b - a)^2` in IEEE arithmetic.
#[inline]
pub(crate) fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Every unordered pair `(i, j)`, `i < j`, whose points carry different classes.
pub fn cross_class_pairs(ds: &Dataset) -> impl Iterator<Item = (usize, usize)> + '_ {
    (0..ds.len()).flat_map(move |i| {
        ((i + 1)..ds.len())
            .filter(move |&j| ds.label(i) != ds.label(j))
            .map(move |j| (i, j))
    })
}

/// Format a real with 17 significant digits so it parses back to the same bits.
pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn is_numeric(field: &str) -> bool {
    field.trim().parse::<f64>().is_ok()
}

fn parse_feature(field: &str, row: usize, column: usize) -> Result<f64> {
    let v: f64 = field.trim().parse().map_err(|_| Error::NonNumeric {
        row,
        column,
        value: field.to_owned(),
    })?;
    if !v.is_finite() {
        return Err(Error::NonFinite { row, column });
    }
    Ok(v)
}

fn read_csv_records<R: Read>(source: R) -> Result<Vec<csv::StringRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(source);
    let mut records = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| Error::Format(e.to_string()))?;
        // blank lines
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        records.push(rec);
    }
    Ok(records)
}

/// Read a labeled dataset.
///
/// CSV input may carry a header row; it is recognized when any field of the
/// first row other than the label column is non-numeric. JSON input is an
/// array of `{"x": [..], "class": ".."}` objects.
pub fn load<R: Read>(source: R, format: Format, label: &LabelColumn) -> Result<Dataset> {
    let points = match format {
        Format::Csv => load_csv_points(source, label)?,
        Format::Json => load_json_points(source)?,
    };
    let ds = Dataset::new(points)?;
    if ds.is_single_class() {
        log::warn!("dataset has a single class ({})", ds.classes()[0]);
    }
    Ok(ds)
}

fn load_csv_points<R: Read>(source: R, label: &LabelColumn) -> Result<Vec<LabeledPoint>> {
    let records = read_csv_records(source)?;
    let first = records.first().ok_or(Error::EmptyInput)?;
    let width = first.len();
    if width < 2 {
        return Err(Error::Format(
            "need at least one feature column and one label column".into(),
        ));
    }
    let (label_idx, has_header) = match label {
        LabelColumn::Last => (width - 1, None),
        LabelColumn::Index(i) if *i < width => (*i, None),
        LabelColumn::Index(i) => {
            return Err(Error::LabelColumn(format!(
                "index {i} out of range for {width} columns"
            )))
        }
        LabelColumn::Name(name) => match first.iter().position(|f| f == name) {
            Some(i) => (i, Some(true)),
            None => return Err(Error::LabelColumn(format!("no column named {name:?}"))),
        },
    };
    let has_header = has_header.unwrap_or_else(|| {
        first
            .iter()
            .enumerate()
            .any(|(k, f)| k != label_idx && !is_numeric(f))
    });

    let body = if has_header {
        &records[1..]
    } else {
        &records[..]
    };
    if body.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut points = Vec::with_capacity(body.len());
    for (r, rec) in body.iter().enumerate() {
        let row = r + 1;
        if rec.len() != width {
            return Err(Error::DimensionMismatch {
                row,
                expected: width - 1,
                found: rec.len().saturating_sub(1),
            });
        }
        let mut coords = Vec::with_capacity(width - 1);
        for (k, field) in rec.iter().enumerate() {
            if k != label_idx {
                coords.push(parse_feature(field, row, k)?);
            }
        }
        points.push(LabeledPoint::new(coords, &rec[label_idx]));
    }
    Ok(points)
}

#[derive(Serialize, Deserialize)]
struct JsonPoint {
    x: Vec<f64>,
    class: String,
}

fn load_json_points<R: Read>(source: R) -> Result<Vec<LabeledPoint>> {
    let rows: Vec<JsonPoint> =
        serde_json::from_reader(source).map_err(|e| Error::Format(e.to_string()))?;
    Ok(rows
        .into_iter()
        .map(|p| LabeledPoint::new(p.x, p.class))
        .collect())
}

/// Write a dataset in a form [`load`] reads back bit-exactly.
pub fn save<W: Write>(ds: &Dataset, sink: W, format: Format) -> Result<()> {
    let to_format = |e: &dyn fmt::Display| Error::Format(e.to_string());
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(sink);
            let mut header: Vec<String> = (0..ds.dim()).map(|k| format!("x{k}")).collect();
            header.push("class".into());
            w.write_record(&header).map_err(|e| to_format(&e))?;
            for p in ds.points() {
                let mut row: Vec<String> = p.coords.iter().map(|&v| format_real(v)).collect();
                row.push(p.class_id.0.clone());
                w.write_record(&row).map_err(|e| to_format(&e))?;
            }
            w.flush().map_err(|e| to_format(&e))?;
        }
        Format::Json => {
            let rows: Vec<JsonPoint> = ds
                .points()
                .iter()
                .map(|p| JsonPoint {
                    x: p.coords.clone(),
                    class: p.class_id.0.clone(),
                })
                .collect();
            serde_json::to_writer(sink, &rows).map_err(|e| to_format(&e))?;
        }
    }
    Ok(())
}

/// Read unlabeled numeric rows (query points), with an optional header.
pub fn load_unlabeled<R: Read>(source: R) -> Result<Vec<Vec<f64>>> {
    let records = read_csv_records(source)?;
    let first = records.first().ok_or(Error::EmptyInput)?;
    let skip = usize::from(first.iter().any(|f| !is_numeric(f)));
    let width = first.len();
    let mut rows = Vec::new();
    for (r, rec) in records[skip..].iter().enumerate() {
        if rec.len() != width {
            return Err(Error::DimensionMismatch {
                row: r + 1,
                expected: width,
                found: rec.len(),
            });
        }
        rows.push(
            rec.iter()
                .enumerate()
                .map(|(k, f)| parse_feature(f, r + 1, k))
                .collect::<Result<Vec<f64>>>()?,
        );
    }
    if rows.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(rows)
}
