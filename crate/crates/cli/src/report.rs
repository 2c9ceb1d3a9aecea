//! Markdown summaries of sweep results and the Friedman/Nemenyi report.
//!
//! Every number here is recomputed from [`ResultRow`]s; nothing else feeds
//! the tables.

use std::fmt::Write as _;

use anyhow::{bail, Result};
use cwfcm::stats::{friedman, nemenyi, FriedmanResult, ScoreMatrix};
use ndarray::Array2;

use crate::sweep::ResultRow;

/// Values in first-appearance order.
fn ordered<'a>(rows: &'a [ResultRow], key: impl Fn(&'a ResultRow) -> &'a str) -> Vec<&'a str> {
    let mut out: Vec<&str> = Vec::new();
    for r in rows {
        let k = key(r);
        if !out.contains(&k) {
            out.push(k);
        }
    }
    out
}

fn noise_levels(rows: &[ResultRow]) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for r in rows {
        if !out.contains(&r.noise_pct) {
            out.push(r.noise_pct);
        }
    }
    out
}

/// Mean of `metric` over non-failed rows matching the filter.
pub fn mean_metric(rows: &[ResultRow], metric: &str, filter: impl Fn(&ResultRow) -> bool) -> Option<f64> {
    let values: Vec<f64> = rows
        .iter()
        .filter(|r| !r.failed && filter(r))
        .filter_map(|r| r.metric(metric))
        .collect();
    // Shifted around the first value so that identical runs average to
    // exactly that value and tie in the rank statistics.
    let first = *values.first()?;
    Some(first + values.iter().map(|v| v - first).sum::<f64>() / values.len() as f64)
}

fn cell(v: Option<f64>, decimals: usize) -> String {
    v.map_or_else(|| "-".to_owned(), |v| format!("{v:.decimals$}"))
}

pub fn markdown_summary(rows: &[ResultRow]) -> String {
    let datasets = ordered(rows, |r| &r.dataset);
    let methods = ordered(rows, |r| &r.method);
    let levels = noise_levels(rows);
    let mut out = String::new();

    let _ = writeln!(out, "## Average iterations and time\n");
    let mut header = String::from("| Dataset |");
    let mut rule = String::from("|---|");
    for m in &methods {
        let _ = write!(header, " {m} iter | {m} s |");
        rule.push_str("---:|---:|");
    }
    let _ = writeln!(out, "{header}\n{rule}");
    for d in &datasets {
        let mut line = format!("| {d} |");
        for m in &methods {
            let sel = |r: &ResultRow| r.dataset == *d && r.method == *m;
            let _ = write!(
                line,
                " {} | {} |",
                cell(mean_metric(rows, "iterations", sel), 2),
                cell(mean_metric(rows, "seconds", sel), 4)
            );
        }
        let _ = writeln!(out, "{line}");
    }

    let _ = writeln!(out, "\n## External validation (means)\n");
    let _ = writeln!(out, "| Dataset | Method | Purity | Rand index | Error rate (%) | Accuracy rate (%) |");
    let _ = writeln!(out, "|---|---|---:|---:|---:|---:|");
    for d in &datasets {
        for m in &methods {
            let sel = |r: &ResultRow| r.dataset == *d && r.method == *m;
            let _ = writeln!(
                out,
                "| {d} | {m} | {} | {} | {} | {} |",
                cell(mean_metric(rows, "purity", sel), 3),
                cell(mean_metric(rows, "rand_index", sel), 3),
                cell(mean_metric(rows, "error_rate", sel), 3),
                cell(mean_metric(rows, "accuracy_rate", sel), 3),
            );
        }
    }

    let _ = writeln!(out, "\n## Iterations / error rate (%) by noise level\n");
    let mut header = String::from("| Dataset | Method |");
    let mut rule = String::from("|---|---|");
    for l in &levels {
        let _ = write!(header, " {l}% |");
        rule.push_str("---:|");
    }
    let _ = writeln!(out, "{header}\n{rule}");
    for d in &datasets {
        for m in &methods {
            let mut line = format!("| {d} | {m} |");
            for l in &levels {
                let sel = |r: &ResultRow| r.dataset == *d && r.method == *m && r.noise_pct == *l;
                let _ = write!(
                    line,
                    " {} / {} |",
                    cell(mean_metric(rows, "iterations", sel), 1),
                    cell(mean_metric(rows, "error_rate", sel), 3)
                );
            }
            let _ = writeln!(out, "{line}");
        }
    }

    let failed = rows.iter().filter(|r| r.failed).count();
    let _ = writeln!(out, "\n{} runs, {failed} failed.", rows.len());
    out
}

/// Per-(dataset, method) means of `metric`, datasets as rows.
pub fn score_matrix(rows: &[ResultRow], metric: &str) -> Result<ScoreMatrix> {
    if !ResultRow::METRICS.contains(&metric) {
        bail!("unknown metric {metric:?}; expected one of {}", ResultRow::METRICS.join(", "));
    }
    let datasets = ordered(rows, |r| &r.dataset);
    let methods = ordered(rows, |r| &r.method);
    let mut scores = Array2::zeros((datasets.len(), methods.len()));
    for (i, d) in datasets.iter().enumerate() {
        for (j, m) in methods.iter().enumerate() {
            scores[[i, j]] = mean_metric(rows, metric, |r| r.dataset == *d && r.method == *m)
                .ok_or_else(|| anyhow::anyhow!("no {metric} values for dataset {d:?}, method {m:?}"))?;
        }
    }
    Ok(ScoreMatrix::new(
        scores,
        datasets.into_iter().map(String::from).collect(),
        methods.into_iter().map(String::from).collect(),
        ResultRow::lower_is_better(metric),
    )?)
}

pub struct StatsReport {
    pub matrix: ScoreMatrix,
    pub friedman: FriedmanResult,
    pub nemenyi: Array2<f64>,
    pub metric: String,
}

impl StatsReport {
    pub fn compute(rows: &[ResultRow], metric: &str, alpha: f64) -> Result<Self> {
        let matrix = score_matrix(rows, metric)?;
        let friedman = friedman(&matrix, alpha)?;
        let nemenyi = nemenyi(&matrix)?;
        Ok(Self { matrix, friedman, nemenyi, metric: metric.to_owned() })
    }

    /// Method pairs with p below alpha.
    pub fn significant_pairs(&self) -> Vec<(String, String, f64)> {
        let names = self.matrix.method_names();
        let mut out = Vec::new();
        for i in 0..names.len() {
            for j in (i + 1)..names.len() {
                let p = self.nemenyi[[i, j]];
                if p < self.friedman.alpha {
                    out.push((names[i].clone(), names[j].clone(), p));
                }
            }
        }
        out
    }

    pub fn markdown(&self) -> String {
        let f = &self.friedman;
        let names = self.matrix.method_names();
        let mut out = String::new();
        let _ = writeln!(
            out,
            "## Friedman test ({}, {} datasets, {} methods)\n",
            self.metric,
            self.matrix.n_datasets(),
            self.matrix.n_methods()
        );
        let _ = writeln!(out, "| | |\n|---|---:|");
        let _ = writeln!(out, "| Q (observed) | {:.4} |", f.q_statistic);
        let _ = writeln!(out, "| Q (critical) | {:.4} |", f.critical_value);
        let _ = writeln!(out, "| DF | {} |", f.degrees_of_freedom);
        let _ = writeln!(out, "| p-value | {:.4} |", f.p_value);
        let _ = writeln!(out, "| alpha | {} |", f.alpha);
        let _ = writeln!(out, "\n| Method | Mean rank |\n|---|---:|");
        for (n, r) in names.iter().zip(&f.mean_ranks) {
            let _ = writeln!(out, "| {n} | {r:.3} |");
        }

        let _ = writeln!(out, "\n## Nemenyi p-values\n");
        let _ = writeln!(out, "| | {} |", names.join(" | "));
        let _ = writeln!(out, "|---|{}", "---:|".repeat(names.len()));
        for (i, n) in names.iter().enumerate() {
            let cells: Vec<String> = (0..names.len())
                .map(|j| {
                    let p = self.nemenyi[[i, j]];
                    if i != j && p < f.alpha {
                        format!("**{p:.4}**")
                    } else {
                        format!("{p:.4}")
                    }
                })
                .collect();
            let _ = writeln!(out, "| {n} | {} |", cells.join(" | "));
        }
        let pairs = self.significant_pairs();
        if pairs.is_empty() {
            let _ = writeln!(out, "\nNo pair differs at alpha = {}.", f.alpha);
        } else {
            let _ = writeln!(out, "\nSignificant pairs (p < {}):", f.alpha);
            for (a, b, p) in pairs {
                let _ = writeln!(out, "- {a} vs {b}: p = {p:.4}");
            }
        }
        out
    }

    pub fn csv(&self) -> String {
        let f = &self.friedman;
        let names = self.matrix.method_names();
        let mut out = String::new();
        let _ = writeln!(out, "statistic,value");
        let _ = writeln!(out, "q_observed,{}", f.q_statistic);
        let _ = writeln!(out, "q_critical,{}", f.critical_value);
        let _ = writeln!(out, "df,{}", f.degrees_of_freedom);
        let _ = writeln!(out, "p_value,{}", f.p_value);
        let _ = writeln!(out, "alpha,{}", f.alpha);
        let _ = writeln!(out, "\nmethod,{}", names.join(","));
        for (i, n) in names.iter().enumerate() {
            let cells: Vec<String> = self.nemenyi.row(i).iter().map(|p| p.to_string()).collect();
            let _ = writeln!(out, "{n},{}", cells.join(","));
        }
        out
    }
}
