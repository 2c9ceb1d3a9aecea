//! The fuzzy c-means alternating optimization: initialize a partition, then
//! repeat center update, distance evaluation, objective and membership
//! update until the objective settles.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use ndarray::{Array1, Array2, ArrayView2, Axis, Zip};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::Dataset;
use crate::distance::{DistanceSpec, Metric};
use crate::error::{Error, Result};
use crate::weighting::{feature_weights, sf_values, WeightScheme, WeightVector};

/// Floor applied to triangular-kernel memberships in [`init_sf`].
pub const SF_KERNEL_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Init {
    Random { seed: u64 },
    SfDeterministic,
}

impl Init {
    pub fn is_deterministic(self) -> bool {
        matches!(self, Init::SfDeterministic)
    }
}

/// How the metric enters the objective and the membership update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DistancePower {
    /// Uses d², the classic FCM objective.
    #[default]
    Squared,
    /// Uses d itself.
    Linear,
}

impl DistancePower {
    pub fn name(self) -> &'static str {
        match self {
            DistancePower::Squared => "squared",
            DistancePower::Linear => "linear",
        }
    }
}

impl fmt::Display for DistancePower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DistancePower {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "squared" => Ok(DistancePower::Squared),
            "linear" => Ok(DistancePower::Linear),
            _ => Err(Error::InvalidParameter(format!("unknown distance power {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FcmConfig {
    pub clusters: usize,
    pub fuzziness: f64,
    pub epsilon: f64,
    pub max_iter: usize,
    pub init: Init,
    pub distance: DistanceSpec,
    pub weight_scheme: WeightScheme,
    pub power: DistancePower,
    /// Min-max scale features before clustering.
    pub normalize: bool,
}

impl FcmConfig {
    pub fn new(clusters: usize) -> Self {
        Self {
            clusters,
            fuzziness: 2.0,
            epsilon: 1e-5,
            max_iter: 100,
            init: Init::Random { seed: 0 },
            distance: DistanceSpec::euclidean(),
            weight_scheme: WeightScheme::None,
            power: DistancePower::Squared,
            normalize: false,
        }
    }

    /// Plain FCM: Euclidean, unweighted, random initial partition.
    pub fn fcm(clusters: usize, seed: u64) -> Self {
        Self { init: Init::Random { seed }, ..Self::new(clusters) }
    }

    /// Canberra distance with fuzzified VMR weights and the SF initializer.
    pub fn cwfcm(clusters: usize) -> Self {
        Self {
            init: Init::SfDeterministic,
            distance: DistanceSpec::canberra(),
            weight_scheme: WeightScheme::Vmr,
            power: DistancePower::Linear,
            ..Self::new(clusters)
        }
    }

    pub fn validate(&self, n_points: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.clusters < 2 {
            return bad(format!("need at least 2 clusters, got {}", self.clusters));
        }
        if self.clusters > n_points {
            return bad(format!("{} clusters for {n_points} points", self.clusters));
        }
        if !(self.fuzziness > 1.0 && self.fuzziness.is_finite()) {
            return bad(format!("fuzziness must be > 1, got {}", self.fuzziness));
        }
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return bad(format!("epsilon must be > 0, got {}", self.epsilon));
        }
        if self.max_iter < 1 {
            return bad("max_iter must be >= 1".into());
        }
        Ok(())
    }
}

/// Row-stochastic n × c membership matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionMatrix(Array2<f64>);

impl PartitionMatrix {
    pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

    pub fn new(mu: Array2<f64>) -> Result<Self> {
        if mu.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
            return Err(Error::InvalidParameter("memberships must lie in [0, 1]".into()));
        }
        for (i, row) in mu.rows().into_iter().enumerate() {
            if (row.sum() - 1.0).abs() > Self::ROW_SUM_TOLERANCE {
                return Err(Error::InvalidParameter(format!("membership row {i} does not sum to 1")));
            }
        }
        Ok(Self(mu))
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.0.view()
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.0
    }

    pub fn n_points(&self) -> usize {
        self.0.nrows()
    }

    pub fn n_clusters(&self) -> usize {
        self.0.ncols()
    }

    /// Index of the largest membership in each row; the first one wins ties.
    pub fn crisp_labels(&self) -> Vec<usize> {
        self.0
            .rows()
            .into_iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .fold((0, f64::NEG_INFINITY), |best, (k, &v)| if v > best.1 { (k, v) } else { best })
                    .0
            })
            .collect()
    }

    /// Largest deviation of a row sum from 1.
    pub fn max_row_error(&self) -> f64 {
        self.0.rows().into_iter().map(|r| (r.sum() - 1.0).abs()).fold(0.0, f64::max)
    }
}

fn normalize_rows(mut mu: Array2<f64>) -> Array2<f64> {
    for mut row in mu.rows_mut() {
        let s = row.sum();
        row /= s;
    }
    mu
}

/// Uniform draws, each row normalized to sum to one.
pub fn init_random(n: usize, c: usize, seed: u64) -> Result<PartitionMatrix> {
    if c < 2 || n < c {
        return Err(Error::InvalidParameter(format!("need n >= c >= 2, got n={n}, c={c}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Open interval keeps every row sum strictly positive.
    let mu = Array2::from_shape_simple_fn((n, c), || rng.random_range(f64::EPSILON..1.0));
    Ok(PartitionMatrix(normalize_rows(mu)))
}

/// Deterministic partition from SF values.
///
/// Each point's scaled SF value `f = (SF - a) / (b - a)` is spread over the
/// clusters with triangular kernels centered at `(k + 0.5) / c` of half-width
/// `1 / c`, floored at [`SF_KERNEL_FLOOR`] and row-normalized. Low-SF points
/// lean toward cluster 0, high-SF points toward cluster `c - 1`.
pub fn init_sf(data: &Dataset, c: usize) -> Result<PartitionMatrix> {
    let n = data.n_points();
    if c < 2 || n < c {
        return Err(Error::InvalidParameter(format!("need n >= c >= 2, got n={n}, c={c}")));
    }
    let sf = sf_values(data);
    let a = sf.iter().copied().fold(f64::INFINITY, f64::min);
    let b = sf.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if b.is_nan() || b <= a {
        return Err(Error::DegenerateSf);
    }
    let cf = c as f64;
    let mu = Array2::from_shape_fn((n, c), |(i, k)| {
        let f = (sf[i] - a) / (b - a);
        let center = (k as f64 + 0.5) / cf;
        (1.0 - cf * (f - center).abs()).max(SF_KERNEL_FLOOR)
    });
    Ok(PartitionMatrix(normalize_rows(mu)))
}

/// `v_kj = Σ_i μ_ik^z x_ij / Σ_i μ_ik^z`.
pub fn update_centers(
    points: ArrayView2<'_, f64>,
    partition: &PartitionMatrix,
    fuzziness: f64,
) -> Result<Array2<f64>> {
    if points.nrows() != partition.n_points() {
        return Err(Error::DimensionMismatch { expected: partition.n_points(), found: points.nrows() });
    }
    let powered = partition.0.mapv(|u| u.powf(fuzziness));
    let totals = powered.sum_axis(Axis(0));
    if let Some(cluster) = totals.iter().position(|&t| t.is_nan() || t <= 0.0) {
        return Err(Error::EmptyCluster { cluster });
    }
    let mut centers = powered.t().dot(&points);
    for (mut row, &t) in centers.rows_mut().into_iter().zip(&totals) {
        row /= t;
    }
    Ok(centers)
}

/// `μ_ik = (D_ik)^(-1/(z-1)) / Σ_l (D_il)^(-1/(z-1))` for a dissimilarity
/// matrix `D`. A row with zero entries splits its membership equally among
/// those clusters.
pub fn update_memberships(dissimilarity: ArrayView2<'_, f64>, fuzziness: f64) -> PartitionMatrix {
    let exponent = -1.0 / (fuzziness - 1.0);
    let mut mu = Array2::zeros(dissimilarity.raw_dim());
    for (drow, mut urow) in dissimilarity.rows().into_iter().zip(mu.rows_mut()) {
        let zeros = drow.iter().filter(|&&d| d == 0.0).count();
        if zeros > 0 {
            let share = 1.0 / zeros as f64;
            Zip::from(&mut urow).and(&drow).for_each(|u, &d| *u = if d == 0.0 { share } else { 0.0 });
            continue;
        }
        // Scale by the row minimum so large exponents cannot overflow.
        let dmin = drow.iter().copied().fold(f64::INFINITY, f64::min);
        Zip::from(&mut urow).and(&drow).for_each(|u, &d| *u = (d / dmin).powf(exponent));
        let s = urow.sum();
        urow /= s;
    }
    PartitionMatrix(mu)
}

/// `P = Σ_i Σ_k μ_ik^z D_ik`.
pub fn objective(partition: &PartitionMatrix, dissimilarity: ArrayView2<'_, f64>, fuzziness: f64) -> f64 {
    Zip::from(&partition.0)
        .and(&dissimilarity)
        .fold(0.0, |acc, &u, &d| acc + u.powf(fuzziness) * d)
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub partition: PartitionMatrix,
    pub centers: Array2<f64>,
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub wall_time: f64,
    pub crisp_labels: Vec<usize>,
    pub weights: WeightVector,
}

impl RunResult {
    pub fn final_objective(&self) -> f64 {
        self.objective_trace.last().copied().unwrap_or(f64::NAN)
    }
}

/// State handed to a [`fit_observed`] callback after each iteration.
pub struct IterationState<'a> {
    pub iteration: usize,
    pub objective: f64,
    pub centers: &'a Array2<f64>,
    pub partition: &'a PartitionMatrix,
}

pub fn fit(data: &Dataset, config: &FcmConfig) -> Result<RunResult> {
    fit_observed(data, config, |_| {})
}

/// Same as [`fit`], calling `observe` after every membership update.
pub fn fit_observed(
    data: &Dataset,
    config: &FcmConfig,
    mut observe: impl FnMut(&IterationState<'_>),
) -> Result<RunResult> {
    config.validate(data.n_points())?;
    let start = Instant::now();

    let working = if config.normalize { data.normalized() } else { data.clone() };
    // Weights are a property of the input data, computed once before the loop.
    let weights = feature_weights(data, config.weight_scheme)?;
    let mut distance = config.distance.resolved_for(&working)?;
    if config.weight_scheme != WeightScheme::None {
        distance = distance.with_weights(Array1::from(weights.values.clone()))?;
    }
    if let Some(w) = distance.weights() {
        if w.len() != data.n_features() {
            return Err(Error::DimensionMismatch { expected: data.n_features(), found: w.len() });
        }
    }
    if distance.metric() == Metric::Mahalanobis {
        let m = distance.mahalanobis_matrix().map_or(0, |a| a.nrows());
        if m != data.n_features() {
            return Err(Error::DimensionMismatch { expected: data.n_features(), found: m });
        }
    }

    let points = working.points();
    let mut partition = match config.init {
        Init::Random { seed } => init_random(data.n_points(), config.clusters, seed)?,
        Init::SfDeterministic => init_sf(&working, config.clusters)?,
    };

    let mut trace = Vec::with_capacity(config.max_iter);
    let mut centers;
    let mut converged = false;
    let mut dissim = Array2::zeros((data.n_points(), config.clusters));
    loop {
        let iteration = trace.len() + 1;
        centers = update_centers(points, &partition, config.fuzziness)?;
        for (x, mut drow) in points.rows().into_iter().zip(dissim.rows_mut()) {
            for (v, d) in centers.rows().into_iter().zip(drow.iter_mut()) {
                *d = match config.power {
                    DistancePower::Squared => distance.eval_squared(x, v),
                    DistancePower::Linear => distance.eval(x, v),
                };
            }
        }
        let p = objective(&partition, dissim.view(), config.fuzziness);
        if !p.is_finite() {
            return Err(Error::NonFiniteObjective { iteration });
        }
        partition = update_memberships(dissim.view(), config.fuzziness);
        observe(&IterationState { iteration, objective: p, centers: &centers, partition: &partition });

        let delta = trace.last().map(|prev: &f64| (p - prev).abs());
        trace.push(p);
        if delta.is_some_and(|d| d < config.epsilon) {
            converged = true;
            break;
        }
        if iteration >= config.max_iter {
            break;
        }
    }

    let crisp_labels = partition.crisp_labels();
    Ok(RunResult {
        iterations: trace.len(),
        objective_trace: trace,
        converged,
        wall_time: start.elapsed().as_secs_f64(),
        partition,
        centers,
        crisp_labels,
        weights,
    })
}
