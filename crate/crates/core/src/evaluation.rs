//! External validation of a crisp clustering against ground-truth classes.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub rand_index: f64,
    pub purity: f64,
    /// Percent.
    pub accuracy_rate: f64,
    /// Percent.
    pub error_rate: f64,
    pub misclassified: usize,
    /// `(cluster label, class)` pairs of the one-to-one mapping. Clusters
    /// left without a class (more clusters than classes) map to `None`.
    pub mapping: Vec<(usize, Option<usize>)>,
}

pub fn evaluate(predicted: &[usize], actual: &[usize]) -> Result<EvaluationReport> {
    let acc = accuracy(predicted, actual)?;
    Ok(EvaluationReport {
        rand_index: rand_index(predicted, actual)?,
        purity: purity(predicted, actual)?,
        accuracy_rate: acc.accuracy_rate,
        error_rate: acc.error_rate,
        misclassified: acc.misclassified,
        mapping: acc.mapping,
    })
}

/// Cluster × class co-occurrence counts over densely re-indexed labels.
struct Contingency {
    clusters: Vec<usize>,
    counts: Vec<Vec<u64>>,
    n_classes: usize,
}

impl Contingency {
    fn new(predicted: &[usize], actual: &[usize]) -> Result<Self> {
        if predicted.len() != actual.len() {
            return Err(Error::LengthMismatch { left: predicted.len(), right: actual.len() });
        }
        let dense = |labels: &[usize]| -> BTreeMap<usize, usize> {
            let keys: BTreeSet<usize> = labels.iter().copied().collect();
            keys.into_iter().enumerate().map(|(i, l)| (l, i)).collect()
        };
        let cluster_ids = dense(predicted);
        let class_ids = dense(actual);
        let mut counts = vec![vec![0u64; class_ids.len()]; cluster_ids.len()];
        for (p, a) in predicted.iter().zip(actual) {
            counts[cluster_ids[p]][class_ids[a]] += 1;
        }
        Ok(Self { clusters: cluster_ids.into_keys().collect(), counts, n_classes: class_ids.len() })
    }
}

fn pairs(n: u64) -> u64 {
    n * n.saturating_sub(1) / 2
}

/// Fraction of point pairs on which the two labelings agree.
pub fn rand_index(predicted: &[usize], actual: &[usize]) -> Result<f64> {
    let n = predicted.len();
    if n < 2 {
        return Err(Error::InvalidParameter("rand index needs at least 2 points".into()));
    }
    let table = Contingency::new(predicted, actual)?;
    let together_both: u64 = table.counts.iter().flatten().map(|&c| pairs(c)).sum();
    let together_pred: u64 = table.counts.iter().map(|row| pairs(row.iter().sum())).sum();
    let together_actual: u64 = (0..table.n_classes)
        .map(|j| pairs(table.counts.iter().map(|row| row[j]).sum()))
        .sum();
    let total = pairs(n as u64);
    let apart_both = total + together_both - together_pred - together_actual;
    Ok((together_both + apart_both) as f64 / total as f64)
}

/// `(1/n) Σ_clusters max_class |cluster ∩ class|`.
pub fn purity(predicted: &[usize], actual: &[usize]) -> Result<f64> {
    let table = Contingency::new(predicted, actual)?;
    if predicted.is_empty() {
        return Err(Error::InvalidParameter("purity of an empty labeling".into()));
    }
    let majority: u64 = table.counts.iter().map(|row| row.iter().copied().max().unwrap_or(0)).sum();
    Ok(majority as f64 / predicted.len() as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Accuracy {
    pub accuracy_rate: f64,
    pub error_rate: f64,
    pub misclassified: usize,
    pub correct: usize,
    pub mapping: Vec<(usize, Option<usize>)>,
}

/// Accuracy under the one-to-one cluster→class mapping that maximizes the
/// number of correctly assigned points.
///
/// `actual` classes are reported by their original label values.
pub fn accuracy(predicted: &[usize], actual: &[usize]) -> Result<Accuracy> {
    let table = Contingency::new(predicted, actual)?;
    let n = predicted.len();
    if n == 0 {
        return Err(Error::InvalidParameter("accuracy of an empty labeling".into()));
    }
    let mut classes: Vec<usize> = actual.to_vec();
    classes.sort_unstable();
    classes.dedup();

    let size = table.clusters.len().max(table.n_classes);
    // Maximize matches == minimize negated counts; padding rows/cols are 0.
    let cost: Vec<Vec<i64>> = (0..size)
        .map(|r| {
            (0..size)
                .map(|c| match (table.counts.get(r), c < table.n_classes) {
                    (Some(row), true) => -(row[c] as i64),
                    _ => 0,
                })
                .collect()
        })
        .collect();
    let assignment = hungarian(&cost);

    let mut correct = 0u64;
    let mut mapping = Vec::with_capacity(table.clusters.len());
    for (r, &cluster) in table.clusters.iter().enumerate() {
        let c = assignment[r];
        if c < table.n_classes {
            correct += table.counts[r][c];
            mapping.push((cluster, Some(classes[c])));
        } else {
            mapping.push((cluster, None));
        }
    }
    let correct = correct as usize;
    let accuracy_rate = 100.0 * correct as f64 / n as f64;
    Ok(Accuracy {
        accuracy_rate,
        error_rate: 100.0 - accuracy_rate,
        misclassified: n - correct,
        correct,
        mapping,
    })
}

/// Minimum-cost perfect matching on a square cost matrix (Kuhn-Munkres with
/// potentials). Returns the column assigned to each row.
pub fn hungarian(cost: &[Vec<i64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    const INF: i64 = i64::MAX / 4;
    // 1-based arrays; index 0 is the virtual root.
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut matched_row = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        matched_row[0] = i;
        let mut j0 = 0;
        let mut minv = vec![INF; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = matched_row[j0];
            let mut delta = INF;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[matched_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if matched_row[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            matched_row[j0] = matched_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0; n];
    for j in 1..=n {
        assignment[matched_row[j] - 1] = j - 1;
    }
    assignment
}
