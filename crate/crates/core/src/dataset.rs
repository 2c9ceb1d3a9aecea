//! Labeled numeric datasets: delimited-text loading, min-max scaling and
//! seeded attribute noise.

use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use ndarray::{Array2, ArrayView2, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// A numeric feature matrix with one integer class label per row.
///
/// Labels are dense indices into `class_names`. Instances are immutable once
/// built; transformations return new values.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    points: Array2<f64>,
    labels: Vec<usize>,
    feature_names: Vec<String>,
    class_names: Vec<String>,
}

impl Dataset {
    pub fn new(
        points: Array2<f64>,
        labels: Vec<usize>,
        feature_names: Vec<String>,
        class_names: Vec<String>,
    ) -> Result<Self> {
        let (n, m) = points.dim();
        if n < 2 {
            return Err(Error::InvalidDataset(format!("need at least 2 points, got {n}")));
        }
        if m < 1 {
            return Err(Error::InvalidDataset("need at least one feature".into()));
        }
        if class_names.is_empty() {
            return Err(Error::InvalidDataset("need at least one class".into()));
        }
        if labels.len() != n {
            return Err(Error::LengthMismatch { left: labels.len(), right: n });
        }
        if feature_names.len() != m {
            return Err(Error::LengthMismatch { left: feature_names.len(), right: m });
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= class_names.len()) {
            return Err(Error::InvalidDataset(format!(
                "label {bad} out of range for {} classes",
                class_names.len()
            )));
        }
        if points.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { points, labels, feature_names, class_names })
    }

    /// Builds a dataset with generated feature and class names.
    pub fn from_parts(points: Array2<f64>, labels: Vec<usize>) -> Result<Self> {
        let m = points.ncols();
        let k = labels.iter().max().map_or(1, |&l| l + 1);
        Self::new(
            points,
            labels,
            (1..=m).map(|j| format!("x{j}")).collect(),
            (0..k).map(|c| c.to_string()).collect(),
        )
    }

    pub fn points(&self) -> ArrayView2<'_, f64> {
        self.points.view()
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn n_points(&self) -> usize {
        self.points.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.points.ncols()
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    /// Number of points per class, indexed by label.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes()];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Same labels and names, new feature values.
    pub fn with_points(&self, points: Array2<f64>) -> Result<Self> {
        if points.dim() != self.points.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.points.len(),
                found: points.len(),
            });
        }
        Self::new(
            points,
            self.labels.clone(),
            self.feature_names.clone(),
            self.class_names.clone(),
        )
    }

    /// Min-max scales every feature to [0, 1]. Constant features map to 0.
    pub fn normalized(&self) -> Self {
        let mut points = self.points.clone();
        for mut col in points.axis_iter_mut(Axis(1)) {
            let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let span = hi - lo;
            col.mapv_inplace(|v| if span > 0.0 { (v - lo) / span } else { 0.0 });
        }
        Self { points, ..self.clone() }
    }

    /// Rows reordered so that row `i` of the result is row `order[i]` of `self`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        if order.len() != self.n_points() {
            return Err(Error::LengthMismatch { left: order.len(), right: self.n_points() });
        }
        let points = self.points.select(Axis(0), order);
        let labels = order.iter().map(|&i| self.labels[i]).collect();
        Self::new(points, labels, self.feature_names.clone(), self.class_names.clone())
    }
}

/// Which column of a delimited file carries the class label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LabelColumn {
    Index(usize),
    #[default]
    Last,
}

impl LabelColumn {
    fn resolve(self, width: usize) -> Result<usize> {
        match self {
            LabelColumn::Last => Ok(width - 1),
            LabelColumn::Index(i) if i < width => Ok(i),
            LabelColumn::Index(i) => Err(Error::InvalidParameter(format!(
                "label column {i} out of range for {width} columns"
            ))),
        }
    }
}

impl FromStr for LabelColumn {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("last") {
            return Ok(LabelColumn::Last);
        }
        s.parse()
            .map(LabelColumn::Index)
            .map_err(|_| Error::InvalidParameter(format!("label column must be an index or \"last\", got {s:?}")))
    }
}

impl fmt::Display for LabelColumn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabelColumn::Index(i) => write!(f, "{i}"),
            LabelColumn::Last => f.write_str("last"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CsvOptions {
    pub label_column: LabelColumn,
    pub delimiter: u8,
    pub has_header: bool,
}

impl Default for CsvOptions {
    fn default() -> Self {
        Self { label_column: LabelColumn::Last, delimiter: b',', has_header: false }
    }
}

pub fn load_csv(path: impl AsRef<Path>, options: &CsvOptions) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    read_csv(file, options)
}

/// Parses delimited text. Class labels are encoded in first-appearance order.
/// Reported row numbers are 1-based file lines; columns are 0-based.
pub fn read_csv<R: Read>(reader: R, options: &CsvOptions) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(options.delimiter)
        .has_headers(options.has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let header: Option<Vec<String>> = if options.has_header {
        Some(rdr.headers()?.iter().map(str::to_owned).collect())
    } else {
        None
    };

    let mut width = header.as_ref().map(Vec::len);
    let mut label_col = None;
    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut class_index: HashMap<String, usize> = HashMap::new();
    let mut class_names = Vec::new();

    for record in rdr.records() {
        let record = record?;
        let row = record.position().map_or(0, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        let expected = *width.get_or_insert(record.len());
        if record.len() != expected {
            return Err(Error::RaggedRow { row, found: record.len(), expected });
        }
        if expected < 2 {
            return Err(Error::InvalidDataset("need a label column and at least one feature".into()));
        }
        let lc = match label_col {
            Some(lc) => lc,
            None => *label_col.insert(options.label_column.resolve(expected)?),
        };
        for (column, field) in record.iter().enumerate() {
            if column == lc {
                let next = class_names.len();
                let id = *class_index.entry(field.to_owned()).or_insert_with(|| {
                    class_names.push(field.to_owned());
                    next
                });
                labels.push(id);
            } else {
                let v: f64 = field.parse().map_err(|_| Error::Parse {
                    row,
                    column,
                    value: field.to_owned(),
                })?;
                if !v.is_finite() {
                    return Err(Error::Parse { row, column, value: field.to_owned() });
                }
                values.push(v);
            }
        }
    }

    let n = labels.len();
    if n < 2 {
        return Err(Error::InvalidDataset(format!("need at least 2 data rows, got {n}")));
    }
    let width = width.unwrap_or(0);
    let lc = label_col.unwrap_or(0);
    let m = width - 1;
    let feature_names = match header {
        Some(h) => h.into_iter().enumerate().filter(|&(j, _)| j != lc).map(|(_, s)| s).collect(),
        None => (1..=m).map(|j| format!("x{j}")).collect(),
    };
    let points = Array2::from_shape_vec((n, m), values)
        .map_err(|e| Error::InvalidDataset(e.to_string()))?;
    Dataset::new(points, labels, feature_names, class_names)
}

/// Writes `data` in the layout described by `options`; the label goes back
/// into the same column it was read from. Floats use the shortest
/// representation that parses back to the same value.
pub fn write_csv<W: Write>(data: &Dataset, writer: W, options: &CsvOptions) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new().delimiter(options.delimiter).from_writer(writer);
    let width = data.n_features() + 1;
    let lc = options.label_column.resolve(width)?;
    if options.has_header {
        let mut names = data.feature_names.iter().map(String::as_str);
        let row: Vec<&str> = (0..width)
            .map(|j| if j == lc { "class" } else { names.next().unwrap_or_default() })
            .collect();
        wtr.write_record(&row)?;
    }
    for (point, &label) in data.points.rows().into_iter().zip(&data.labels) {
        let mut feats = point.iter();
        let row: Vec<String> = (0..width)
            .map(|j| {
                if j == lc {
                    data.class_names[label].clone()
                } else {
                    feats.next().map(|v| v.to_string()).unwrap_or_default()
                }
            })
            .collect();
        wtr.write_record(&row)?;
    }
    wtr.flush().map_err(|source| Error::Io { path: "<output>".into(), source })?;
    Ok(())
}

/// Attribute-noise request: `level` is a percentage of each feature's
/// standard deviation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    level: f64,
    seed: u64,
}

impl NoiseSpec {
    pub fn new(level: f64, seed: u64) -> Result<Self> {
        if !(0.0..=100.0).contains(&level) {
            return Err(Error::InvalidParameter(format!("noise level must be in [0, 100], got {level}")));
        }
        Ok(Self { level, seed })
    }

    pub fn level(&self) -> f64 {
        self.level
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// Sample standard deviation (n - 1 denominator) of each column.
pub(crate) fn column_std(points: ArrayView2<'_, f64>) -> Vec<f64> {
    points.axis_iter(Axis(1)).map(|col| col.std(1.0)).collect()
}

/// Adds zero-mean Gaussian noise with standard deviation
/// `level / 100 * sd_j` to every value of feature `j`.
pub fn add_noise(data: &Dataset, spec: &NoiseSpec) -> Dataset {
    if spec.level == 0.0 {
        return data.clone();
    }
    let mut points = data.points.clone();
    let scale: Vec<f64> = column_std(data.points())
        .into_iter()
        .map(|sd| spec.level / 100.0 * sd)
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    for mut row in points.rows_mut() {
        for (v, &s) in row.iter_mut().zip(&scale) {
            let g: f64 = StandardNormal.sample(&mut rng);
            if s > 0.0 {
                *v += s * g;
            }
        }
    }
    Dataset { points, ..data.clone() }
}
