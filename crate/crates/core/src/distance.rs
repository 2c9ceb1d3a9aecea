//! Point-to-center dissimilarities: Euclidean, city block, Minkowski,
//! Canberra and Mahalanobis, each with optional per-feature weights.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use ndarray::{Array1, Array2, ArrayView1, Axis};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

pub const DEFAULT_MINKOWSKI_P: u32 = 3;
pub const DEFAULT_MAHALANOBIS_RIDGE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    Euclidean,
    CityBlock,
    Minkowski,
    Canberra,
    Mahalanobis,
}

impl Metric {
    pub const ALL: [Metric; 5] = [
        Metric::Euclidean,
        Metric::CityBlock,
        Metric::Minkowski,
        Metric::Canberra,
        Metric::Mahalanobis,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Euclidean => "euclidean",
            Metric::CityBlock => "cityblock",
            Metric::Minkowski => "minkowski",
            Metric::Canberra => "canberra",
            Metric::Mahalanobis => "mahalanobis",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown distance metric {s:?}")))
    }
}

/// A metric plus its parameters.
///
/// When `weights` is set every per-feature term is scaled by `w_j` before
/// summation. For Mahalanobis the difference vector is scaled by `sqrt(w_j)`
/// on both sides of the quadratic form.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceSpec {
    metric: Metric,
    minkowski_p: u32,
    weights: Option<Array1<f64>>,
    mahalanobis: Option<Array2<f64>>,
    mahalanobis_ridge: f64,
}

impl DistanceSpec {
    pub fn new(metric: Metric) -> Self {
        Self {
            metric,
            minkowski_p: DEFAULT_MINKOWSKI_P,
            weights: None,
            mahalanobis: None,
            mahalanobis_ridge: DEFAULT_MAHALANOBIS_RIDGE,
        }
    }

    pub fn euclidean() -> Self {
        Self::new(Metric::Euclidean)
    }

    pub fn canberra() -> Self {
        Self::new(Metric::Canberra)
    }

    pub fn with_minkowski_p(mut self, p: u32) -> Result<Self> {
        if p < 1 {
            return Err(Error::InvalidParameter("minkowski p must be >= 1".into()));
        }
        self.minkowski_p = p;
        Ok(self)
    }

    pub fn with_weights(mut self, weights: Array1<f64>) -> Result<Self> {
        if weights.iter().any(|w| !(0.0..=1.0).contains(w)) {
            return Err(Error::InvalidParameter("feature weights must lie in [0, 1]".into()));
        }
        self.weights = Some(weights);
        Ok(self)
    }

    pub fn without_weights(mut self) -> Self {
        self.weights = None;
        self
    }

    /// Supplies the Mahalanobis matrix directly. It must be symmetric and
    /// positive semi-definite.
    pub fn with_mahalanobis_matrix(mut self, matrix: Array2<f64>) -> Result<Self> {
        check_psd(&matrix)?;
        self.mahalanobis = Some(matrix);
        Ok(self)
    }

    /// Ridge used when the Mahalanobis matrix is derived from data.
    pub fn with_mahalanobis_ridge(mut self, ridge: f64) -> Result<Self> {
        if !(ridge >= 0.0 && ridge.is_finite()) {
            return Err(Error::InvalidParameter("ridge must be a finite non-negative number".into()));
        }
        self.mahalanobis_ridge = ridge;
        Ok(self)
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn minkowski_p(&self) -> u32 {
        self.minkowski_p
    }

    pub fn weights(&self) -> Option<&Array1<f64>> {
        self.weights.as_ref()
    }

    pub fn mahalanobis_matrix(&self) -> Option<&Array2<f64>> {
        self.mahalanobis.as_ref()
    }

    pub fn mahalanobis_ridge(&self) -> f64 {
        self.mahalanobis_ridge
    }

    /// Fills in the Mahalanobis matrix from `data` if the metric needs one
    /// and none was supplied.
    pub fn resolved_for(&self, data: &Dataset) -> Result<Self> {
        let mut spec = self.clone();
        if spec.metric == Metric::Mahalanobis && spec.mahalanobis.is_none() {
            spec.mahalanobis = Some(mahalanobis_matrix_from(data, spec.mahalanobis_ridge)?);
        }
        Ok(spec)
    }

    fn check_inputs(&self, x: ArrayView1<'_, f64>, v: ArrayView1<'_, f64>) -> Result<()> {
        let m = x.len();
        if v.len() != m {
            return Err(Error::DimensionMismatch { expected: m, found: v.len() });
        }
        if let Some(w) = &self.weights {
            if w.len() != m {
                return Err(Error::DimensionMismatch { expected: w.len(), found: m });
            }
        }
        if self.metric == Metric::Mahalanobis {
            match &self.mahalanobis {
                Some(a) if a.nrows() != m => {
                    return Err(Error::DimensionMismatch { expected: a.nrows(), found: m })
                }
                Some(_) => {}
                None => {
                    return Err(Error::InvalidParameter(
                        "mahalanobis distance needs a matrix; supply one or resolve it from data".into(),
                    ))
                }
            }
        }
        if x.iter().chain(v.iter()).any(|a| !a.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(())
    }

    /// d(x, v), unsquared.
    pub fn distance(&self, x: ArrayView1<'_, f64>, v: ArrayView1<'_, f64>) -> Result<f64> {
        self.check_inputs(x, v)?;
        Ok(self.eval(x, v))
    }

    /// d(x, v)². For Mahalanobis this is the quadratic form itself.
    pub fn squared_distance(&self, x: ArrayView1<'_, f64>, v: ArrayView1<'_, f64>) -> Result<f64> {
        self.check_inputs(x, v)?;
        Ok(self.eval_squared(x, v))
    }

    // Callers must have validated dimensions and finiteness.
    pub(crate) fn eval(&self, x: ArrayView1<'_, f64>, v: ArrayView1<'_, f64>) -> f64 {
        match self.metric {
            Metric::Euclidean | Metric::Mahalanobis => self.eval_squared(x, v).sqrt(),
            Metric::CityBlock => self.weighted_sum(x, v, |a, b| (a - b).abs()),
            Metric::Minkowski => {
                let p = self.minkowski_p as i32;
                self.weighted_sum(x, v, |a, b| (a - b).abs().powi(p)).powf(1.0 / p as f64)
            }
            Metric::Canberra => self.weighted_sum(x, v, canberra_term),
        }
    }

    pub(crate) fn eval_squared(&self, x: ArrayView1<'_, f64>, v: ArrayView1<'_, f64>) -> f64 {
        match self.metric {
            Metric::Euclidean => self.weighted_sum(x, v, |a, b| (a - b) * (a - b)),
            Metric::Mahalanobis => self.quadratic_form(x, v),
            _ => {
                let d = self.eval(x, v);
                d * d
            }
        }
    }

    fn weighted_sum(
        &self,
        x: ArrayView1<'_, f64>,
        v: ArrayView1<'_, f64>,
        term: impl Fn(f64, f64) -> f64,
    ) -> f64 {
        match &self.weights {
            Some(w) => x.iter().zip(v).zip(w).map(|((&a, &b), &wj)| wj * term(a, b)).sum(),
            None => x.iter().zip(v).map(|(&a, &b)| term(a, b)).sum(),
        }
    }

    fn quadratic_form(&self, x: ArrayView1<'_, f64>, v: ArrayView1<'_, f64>) -> f64 {
        let a = self.mahalanobis.as_ref().expect("mahalanobis matrix resolved");
        let mut diff = &x - &v;
        if let Some(w) = &self.weights {
            diff.zip_mut_with(w, |d, &wj| *d *= wj.sqrt());
        }
        // Clamp tiny negative round-off from a semi-definite matrix.
        diff.dot(&a.dot(&diff)).max(0.0)
    }
}

/// |a - b| / (|a| + |b|), with 0/0 taken as 0.
#[inline]
pub fn canberra_term(a: f64, b: f64) -> f64 {
    let den = a.abs() + b.abs();
    if den == 0.0 {
        0.0
    } else {
        (a - b).abs() / den
    }
}

fn check_psd(matrix: &Array2<f64>) -> Result<()> {
    let (r, c) = matrix.dim();
    if r != c {
        return Err(Error::DimensionMismatch { expected: r, found: c });
    }
    if matrix.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let scale = matrix.iter().fold(0.0_f64, |acc, v| acc.max(v.abs())).max(1.0);
    for i in 0..r {
        for j in 0..i {
            if (matrix[[i, j]] - matrix[[j, i]]).abs() > 1e-10 * scale {
                return Err(Error::InvalidParameter("mahalanobis matrix must be symmetric".into()));
            }
        }
    }
    let min_eig = eigenvalues(matrix).into_iter().fold(f64::INFINITY, f64::min);
    if min_eig < -1e-10 * scale {
        return Err(Error::InvalidParameter(
            "mahalanobis matrix must be positive semi-definite".into(),
        ));
    }
    Ok(())
}

fn to_nalgebra(a: &Array2<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]])
}

/// Eigenvalues of a symmetric matrix, ascending.
pub fn eigenvalues(a: &Array2<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = to_nalgebra(a).symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Sample covariance (n - 1 denominator) of the dataset's features.
pub fn covariance(data: &Dataset) -> Array2<f64> {
    let x = data.points();
    let n = x.nrows() as f64;
    let mean = x.mean_axis(Axis(0)).expect("non-empty dataset");
    let centered = &x - &mean;
    centered.t().dot(&centered) / (n - 1.0)
}

/// `(Σ + λI)⁻¹` with `λ = ridge · trace(Σ) / m`, where Σ is the sample
/// covariance of `data`.
pub fn mahalanobis_matrix_from(data: &Dataset, ridge: f64) -> Result<Array2<f64>> {
    if !(ridge >= 0.0 && ridge.is_finite()) {
        return Err(Error::InvalidParameter("ridge must be a finite non-negative number".into()));
    }
    let mut cov = covariance(data);
    let m = cov.nrows();
    let lambda = ridge * cov.diag().sum() / m as f64;
    for i in 0..m {
        cov[[i, i]] += lambda;
    }
    let ev = eigenvalues(&cov);
    let (lo, hi) = (ev[0], ev[m - 1]);
    if lo.is_nan() || lo <= hi * 1e-13 {
        return Err(Error::SingularMatrix);
    }
    let chol = to_nalgebra(&cov).cholesky().ok_or(Error::SingularMatrix)?;
    let inv = chol.inverse();
    if inv.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularMatrix);
    }
    Ok(Array2::from_shape_fn((m, m), |(i, j)| 0.5 * (inv[(i, j)] + inv[(j, i)])))
}
