//! Benchmark sweeps over datasets × methods × noise levels × trials.

use std::io::{Read, Write};

use anyhow::{Context, Result};
use cwfcm::{add_noise, evaluate, fit, load_csv, Dataset, NoiseSpec};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{BenchConfig, Method};

/// One line of the results CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub dataset: String,
    pub method: String,
    pub noise_pct: f64,
    pub trial: usize,
    pub seed: u64,
    pub iterations: Option<usize>,
    pub seconds: Option<f64>,
    pub objective: Option<f64>,
    pub error_rate: Option<f64>,
    pub accuracy_rate: Option<f64>,
    pub rand_index: Option<f64>,
    pub purity: Option<f64>,
    pub failed: bool,
}

impl ResultRow {
    pub const METRICS: [&'static str; 7] =
        ["iterations", "seconds", "objective", "error_rate", "accuracy_rate", "rand_index", "purity"];

    pub fn metric(&self, name: &str) -> Option<f64> {
        match name {
            "iterations" => self.iterations.map(|v| v as f64),
            "seconds" => self.seconds,
            "objective" => self.objective,
            "error_rate" => self.error_rate,
            "accuracy_rate" => self.accuracy_rate,
            "rand_index" => self.rand_index,
            "purity" => self.purity,
            _ => None,
        }
    }

    /// Whether smaller values of `metric` are better.
    pub fn lower_is_better(metric: &str) -> bool {
        !matches!(metric, "accuracy_rate" | "rand_index" | "purity")
    }
}

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic child seed from a base seed and a path of indices.
pub fn derive_seed(base: u64, path: &[u64]) -> u64 {
    path.iter().fold(mix(base), |acc, &p| mix(acc ^ mix(p)))
}

struct Job<'a> {
    dataset: usize,
    noise: usize,
    method: &'a Method,
    trial: usize,
    seed: u64,
}

/// Runs the sweep. Rows come back in (dataset, noise, method, trial) order
/// regardless of how the work was scheduled.
pub fn run_bench(config: &BenchConfig) -> Result<Vec<ResultRow>> {
    let methods = config.resolved_methods()?;
    let mut datasets = Vec::with_capacity(config.datasets.len());
    for entry in &config.datasets {
        let data = load_csv(&entry.path, &entry.csv_options()?)
            .with_context(|| format!("loading dataset {}", entry.display_name()))?;
        let clusters = entry.clusters.unwrap_or_else(|| data.n_classes().max(2));
        datasets.push((entry.display_name(), clusters, data));
    }

    // One noisy copy per (dataset, noise level), shared by every method and trial.
    let mut noisy: Vec<Vec<Dataset>> = Vec::with_capacity(datasets.len());
    for (di, (_, _, data)) in datasets.iter().enumerate() {
        let mut per_level = Vec::with_capacity(config.noise_levels.len());
        for (ni, &level) in config.noise_levels.iter().enumerate() {
            let seed = derive_seed(config.seed, &[1, di as u64, ni as u64]);
            per_level.push(add_noise(data, &NoiseSpec::new(level, seed)?));
        }
        noisy.push(per_level);
    }

    let mut jobs = Vec::new();
    for di in 0..datasets.len() {
        for ni in 0..config.noise_levels.len() {
            for method in &methods {
                let trials = if method.is_deterministic() { 1 } else { config.trials };
                for trial in 0..trials {
                    let seed = if method.is_deterministic() {
                        config.seed
                    } else {
                        derive_seed(config.seed, &[2, trial as u64])
                    };
                    jobs.push(Job { dataset: di, noise: ni, method, trial, seed });
                }
            }
        }
    }

    let run = |job: &Job<'_>| -> ResultRow {
        let (name, clusters, _) = &datasets[job.dataset];
        let data = &noisy[job.dataset][job.noise];
        let mut row = ResultRow {
            dataset: name.clone(),
            method: job.method.name.clone(),
            noise_pct: config.noise_levels[job.noise],
            trial: job.trial,
            seed: job.seed,
            iterations: None,
            seconds: None,
            objective: None,
            error_rate: None,
            accuracy_rate: None,
            rand_index: None,
            purity: None,
            failed: true,
        };
        let outcome = job
            .method
            .config(*clusters, job.seed)
            .and_then(|cfg| Ok(fit(data, &cfg)?))
            .and_then(|r| Ok((evaluate(&r.crisp_labels, data.labels())?, r)));
        if let Ok((report, result)) = outcome {
            row.iterations = Some(result.iterations);
            row.seconds = config.timing.then_some(result.wall_time);
            row.objective = Some(result.final_objective());
            row.error_rate = Some(report.error_rate);
            row.accuracy_rate = Some(report.accuracy_rate);
            row.rand_index = Some(report.rand_index);
            row.purity = Some(report.purity);
            row.failed = false;
        }
        row
    };

    Ok(if config.parallel {
        jobs.par_iter().map(run).collect()
    } else {
        jobs.iter().map(run).collect()
    })
}

pub fn write_results<W: Write>(rows: &[ResultRow], writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    for row in rows {
        wtr.serialize(row)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_results<R: Read>(reader: R) -> Result<Vec<ResultRow>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers()?.clone();
    for col in ["dataset", "method", "failed"] {
        if !headers.iter().any(|h| h == col) {
            anyhow::bail!("results file has no {col:?} column");
        }
    }
    rdr.deserialize()
        .enumerate()
        .map(|(i, r)| r.with_context(|| format!("malformed results row {}", i + 2)))
        .collect()
}
