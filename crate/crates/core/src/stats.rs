//! Friedman omnibus test and Nemenyi pairwise comparisons for k methods
//! scored on N datasets.

use ndarray::{Array2, ArrayView1};
use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};

/// Scores of k methods (columns) on N datasets (rows).
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    scores: Array2<f64>,
    dataset_names: Vec<String>,
    method_names: Vec<String>,
    lower_is_better: bool,
}

impl ScoreMatrix {
    pub fn new(
        scores: Array2<f64>,
        dataset_names: Vec<String>,
        method_names: Vec<String>,
        lower_is_better: bool,
    ) -> Result<Self> {
        let (n, k) = scores.dim();
        if n < 2 || k < 2 {
            return Err(Error::InvalidParameter(format!(
                "need at least 2 datasets and 2 methods, got {n} x {k}"
            )));
        }
        if dataset_names.len() != n {
            return Err(Error::LengthMismatch { left: dataset_names.len(), right: n });
        }
        if method_names.len() != k {
            return Err(Error::LengthMismatch { left: method_names.len(), right: k });
        }
        if scores.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { scores, dataset_names, method_names, lower_is_better })
    }

    /// Unnamed matrix, handy in tests.
    pub fn from_scores(scores: Array2<f64>, lower_is_better: bool) -> Result<Self> {
        let (n, k) = scores.dim();
        Self::new(
            scores,
            (1..=n).map(|i| format!("d{i}")).collect(),
            (1..=k).map(|j| format!("m{j}")).collect(),
            lower_is_better,
        )
    }

    pub fn scores(&self) -> &Array2<f64> {
        &self.scores
    }

    pub fn dataset_names(&self) -> &[String] {
        &self.dataset_names
    }

    pub fn method_names(&self) -> &[String] {
        &self.method_names
    }

    pub fn lower_is_better(&self) -> bool {
        self.lower_is_better
    }

    pub fn n_datasets(&self) -> usize {
        self.scores.nrows()
    }

    pub fn n_methods(&self) -> usize {
        self.scores.ncols()
    }

    /// Within-row ranks, 1 = best, ties share their average rank.
    pub fn ranks(&self) -> Array2<f64> {
        let mut ranks = Array2::zeros(self.scores.raw_dim());
        for (row, mut out) in self.scores.rows().into_iter().zip(ranks.rows_mut()) {
            let r = average_ranks(row, self.lower_is_better);
            out.assign(&ArrayView1::from(&r));
        }
        ranks
    }
}

fn average_ranks(row: ArrayView1<'_, f64>, ascending: bool) -> Vec<f64> {
    let k = row.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        let ord = row[a].total_cmp(&row[b]);
        if ascending {
            ord
        } else {
            ord.reverse()
        }
    });
    let mut ranks = vec![0.0; k];
    let mut start = 0;
    while start < k {
        let mut end = start + 1;
        while end < k && row[order[end]] == row[order[start]] {
            end += 1;
        }
        // positions start..end hold ranks start+1..=end
        let avg = (start + 1 + end) as f64 / 2.0;
        for &idx in &order[start..end] {
            ranks[idx] = avg;
        }
        start = end;
    }
    ranks
}

#[derive(Debug, Clone, PartialEq)]
pub struct FriedmanResult {
    pub q_statistic: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
    pub rank_sums: Vec<f64>,
    pub mean_ranks: Vec<f64>,
    pub critical_value: f64,
    pub alpha: f64,
}

impl FriedmanResult {
    pub fn significant(&self) -> bool {
        self.p_value < self.alpha
    }
}

/// Friedman test with average ranks for ties and the usual tie correction
/// `C = 1 - Σ(t³ - t) / (N (k³ - k))` applied to Q.
pub fn friedman(matrix: &ScoreMatrix, alpha: f64) -> Result<FriedmanResult> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("alpha must be in (0, 1), got {alpha}")));
    }
    let n = matrix.n_datasets() as f64;
    let k = matrix.n_methods() as f64;
    let ranks = matrix.ranks();
    let rank_sums: Vec<f64> = ranks.columns().into_iter().map(|c| c.sum()).collect();

    let sum_sq: f64 = rank_sums.iter().map(|r| r * r).sum();
    let raw = 12.0 / (n * k * (k + 1.0)) * sum_sq - 3.0 * n * (k + 1.0);

    let mut tie_term = 0.0;
    for row in matrix.scores.rows() {
        let mut sorted: Vec<f64> = row.to_vec();
        sorted.sort_by(f64::total_cmp);
        for group in sorted.chunk_by(|a, b| a == b) {
            let t = group.len() as f64;
            tie_term += t * t * t - t;
        }
    }
    let correction = 1.0 - tie_term / (n * (k * k * k - k));
    let q = if correction > 1e-12 { (raw / correction).max(0.0) } else { 0.0 };

    let df = matrix.n_methods() - 1;
    let chi2 = ChiSquared::new(df as f64).expect("df >= 1");
    Ok(FriedmanResult {
        q_statistic: q,
        degrees_of_freedom: df,
        p_value: chi2.sf(q).clamp(0.0, 1.0),
        mean_ranks: rank_sums.iter().map(|r| r / n).collect(),
        rank_sums,
        critical_value: chi2.inverse_cdf(1.0 - alpha),
        alpha,
    })
}

/// Pairwise Nemenyi p-values, k × k, symmetric with unit diagonal.
///
/// For methods i and j, `z = |R̄_i - R̄_j| / sqrt(k(k+1) / (6N))` and the
/// p-value is the upper tail of the studentized range for k groups and
/// infinite degrees of freedom at `q = z·√2`.
pub fn nemenyi(matrix: &ScoreMatrix) -> Result<Array2<f64>> {
    let n = matrix.n_datasets() as f64;
    let k = matrix.n_methods();
    let ranks = matrix.ranks();
    let mean_ranks: Vec<f64> = ranks.columns().into_iter().map(|c| c.sum() / n).collect();
    let se = (k as f64 * (k as f64 + 1.0) / (6.0 * n)).sqrt();
    let mut p = Array2::from_elem((k, k), 1.0);
    for i in 0..k {
        for j in (i + 1)..k {
            let z = (mean_ranks[i] - mean_ranks[j]).abs() / se;
            let pv = studentized_range_sf(z * std::f64::consts::SQRT_2, k);
            p[[i, j]] = pv;
            p[[j, i]] = pv;
        }
    }
    Ok(p)
}

fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// `P(Q ≤ q)` for the range of `groups` standard normals (infinite df):
/// `k ∫ φ(z) [Φ(z) - Φ(z - q)]^(k-1) dz`, by composite Simpson on [-9, 9 + q].
pub fn studentized_range_cdf(q: f64, groups: usize) -> f64 {
    if q <= 0.0 || groups < 2 {
        return 0.0;
    }
    let (lo, hi) = (-9.0, 9.0 + q);
    let panels = 4000;
    let h = (hi - lo) / panels as f64;
    let f = |z: f64| normal_pdf(z) * (normal_cdf(z) - normal_cdf(z - q)).powi(groups as i32 - 1);
    let mut acc = f(lo) + f(hi);
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(lo + i as f64 * h);
    }
    (groups as f64 * acc * h / 3.0).clamp(0.0, 1.0)
}

pub fn studentized_range_sf(q: f64, groups: usize) -> f64 {
    (1.0 - studentized_range_cdf(q, groups)).clamp(0.0, 1.0)
}
