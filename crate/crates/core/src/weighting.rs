//! Filter-style feature weights and the per-point SF values used by the
//! deterministic initializer.

use std::fmt;
use std::str::FromStr;

use ndarray::{ArrayView1, Axis};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

const ENTROPY_BINS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum WeightScheme {
    #[default]
    None,
    Vmr,
    Entropy,
    Variance,
    StdDev,
    Mean,
}

impl WeightScheme {
    pub const ALL: [WeightScheme; 6] = [
        WeightScheme::None,
        WeightScheme::Vmr,
        WeightScheme::Entropy,
        WeightScheme::Variance,
        WeightScheme::StdDev,
        WeightScheme::Mean,
    ];

    pub fn name(self) -> &'static str {
        match self {
            WeightScheme::None => "none",
            WeightScheme::Vmr => "vmr",
            WeightScheme::Entropy => "entropy",
            WeightScheme::Variance => "variance",
            WeightScheme::StdDev => "stddev",
            WeightScheme::Mean => "mean",
        }
    }
}

impl fmt::Display for WeightScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for WeightScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        WeightScheme::ALL
            .into_iter()
            .find(|w| w.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown weight scheme {s:?}")))
    }
}

/// Per-feature weights in [0, 1] together with the statistic they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    pub values: Vec<f64>,
    pub raw_stats: Vec<f64>,
}

/// Variance-to-mean ratio of every feature, using the (n - 1) sample variance.
pub fn vmr(data: &Dataset) -> Result<Vec<f64>> {
    data.points()
        .axis_iter(Axis(1))
        .enumerate()
        .map(|(feature, col)| {
            let mean = col.mean().expect("non-empty column");
            if mean == 0.0 {
                return Err(Error::ZeroMean { feature });
            }
            Ok(col.var(1.0) / mean)
        })
        .collect()
}

/// Min-max scales `stats` so the smallest maps to exactly 0 and the largest
/// to exactly 1. All-equal input yields all ones.
pub fn fuzzify(stats: &[f64]) -> WeightVector {
    let lo = stats.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = stats.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let values = if hi > lo {
        stats.iter().map(|&s| (s - lo) / (hi - lo)).collect()
    } else {
        vec![1.0; stats.len()]
    };
    WeightVector { values, raw_stats: stats.to_vec() }
}

/// Shannon entropy (nats) of a 10-bin equal-width histogram of the column.
fn histogram_entropy(col: ArrayView1<'_, f64>) -> f64 {
    let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi <= lo {
        return 0.0;
    }
    let width = (hi - lo) / ENTROPY_BINS as f64;
    let mut counts = [0usize; ENTROPY_BINS];
    for &v in col {
        let bin = (((v - lo) / width) as usize).min(ENTROPY_BINS - 1);
        counts[bin] += 1;
    }
    let n = col.len() as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

pub fn feature_weights(data: &Dataset, scheme: WeightScheme) -> Result<WeightVector> {
    let points = data.points();
    let cols = points.axis_iter(Axis(1));
    let stats: Vec<f64> = match scheme {
        WeightScheme::None => {
            let m = data.n_features();
            return Ok(WeightVector { values: vec![1.0; m], raw_stats: vec![1.0; m] });
        }
        WeightScheme::Vmr => vmr(data)?,
        WeightScheme::Entropy => cols.map(histogram_entropy).collect(),
        WeightScheme::Variance => cols.map(|c| c.var(1.0)).collect(),
        WeightScheme::StdDev => cols.map(|c| c.std(1.0)).collect(),
        WeightScheme::Mean => cols.map(|c| c.mean().expect("non-empty column").abs()).collect(),
    };
    Ok(fuzzify(&stats))
}

/// `SF_i = Σ_j sqrt(x_ij²) = Σ_j |x_ij|`.
pub fn sf_values(data: &Dataset) -> Vec<f64> {
    data.points()
        .rows()
        .into_iter()
        .map(|row| row.iter().map(|v| v.abs()).sum())
        .collect()
}
