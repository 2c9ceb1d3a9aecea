//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use cwfcm::engine::fit_observed;
use cwfcm::evaluation::{accuracy, rand_index};
use cwfcm::stats::studentized_range_sf;
use cwfcm::{
    evaluate, feature_weights, fit, friedman, load_csv, nemenyi, Dataset, DistancePower, FcmConfig, Init,
    PartitionMatrix, ScoreMatrix, WeightScheme,
};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

fn iris() -> Dataset {
    load_csv(data_dir().join("iris.csv"), &Default::default()).expect("iris.csv")
}

fn misclassified(data: &Dataset, cfg: &FcmConfig) -> (usize, usize) {
    let run = fit(data, cfg).unwrap();
    (evaluate(&run.crisp_labels, data.labels()).unwrap().misclassified, run.iterations)
}

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(label: &str, start: Instant, limit: f64) -> Result<f64, String> {
    let secs = start.elapsed().as_secs_f64();
    if secs < limit {
        Ok(secs)
    } else {
        Err(format!("{label} took {secs:.3}s, limit {limit}s"))
    }
}

fn c1_weights() -> Outcome {
    let data = iris();
    let start = Instant::now();
    let w = feature_weights(&data, WeightScheme::Vmr).map_err(|e| e.to_string())?;
    let secs = within("weights", start, 0.1)?;
    let want = [0.0728, 0.0, 1.0, 0.5534];
    let worst = w.values.iter().zip(want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let shown: Vec<String> = w.values.iter().map(|v| format!("{v:.4}")).collect();
    check(worst <= 0.005, format!("w = ({}), max dev {worst:.4} (tol 0.005), {secs:.4}s", shown.join(", ")))
}

fn c2_cwfcm_iris() -> Outcome {
    let data = iris();
    let start = Instant::now();
    let (mc, iters) = misclassified(&data, &FcmConfig::cwfcm(3));
    let secs = within("cwfcm fit", start, 2.0)?;
    let er = 100.0 * mc as f64 / 150.0;
    let mut variants = Vec::new();
    for power in [DistancePower::Linear, DistancePower::Squared] {
        for normalize in [false, true] {
            let (m, _) = misclassified(&data, &FcmConfig { power, normalize, ..FcmConfig::cwfcm(3) });
            variants.push(format!("{power}/{}={m}", if normalize { "normalized" } else { "raw" }));
        }
    }
    let target = if mc == 4 { "target met" } else { "target 2.667 missed" };
    check(
        er <= 4.667 + 1e-9,
        format!("MC {mc}, ER {er:.3}% (gate 4.667), {target}, {iters} iterations, {secs:.3}s; variants {}", variants.join(" ")),
    )
}

fn c3_fcm_iris() -> Outcome {
    let data = iris();
    let start = Instant::now();
    let mut counts: HashMap<usize, usize> = HashMap::new();
    for seed in 0..10 {
        *counts.entry(misclassified(&data, &FcmConfig::fcm(3, seed)).0).or_default() += 1;
    }
    let secs = within("10 fcm fits", start, 5.0)?;
    let (&mode, &freq) = counts.iter().max_by_key(|&(mc, n)| (*n, std::cmp::Reverse(*mc))).unwrap();
    check(
        (14..=17).contains(&mode) && freq > 5,
        format!("majority MC {mode} in {freq}/10 seeds (accept 14-17, target 16), {secs:.3}s"),
    )
}

fn c4_init_efficiency() -> Outcome {
    let data = iris();
    let (_, sf_iters) = misclassified(&data, &FcmConfig::cwfcm(3));
    let random: Vec<usize> =
        (0..10).map(|seed| misclassified(&data, &FcmConfig { init: Init::Random { seed }, ..FcmConfig::cwfcm(3) }).1).collect();
    let mean = random.iter().sum::<usize>() as f64 / random.len() as f64;
    check((sf_iters as f64) < mean, format!("sf {sf_iters} iterations vs random mean {mean:.1}"))
}

fn random_labels(rng: &mut impl Rng, n: usize, k: usize) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(0..k)).collect()
}

fn c5_rand_index() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for case in 0..200 {
        let n = rng.random_range(2..=100);
        let (ka, kb) = (rng.random_range(1..=6), rng.random_range(1..=6));
        let a = random_labels(&mut rng, n, ka);
        let b = random_labels(&mut rng, n, kb);
        let (mut agree, mut total) = (0u64, 0u64);
        for i in 0..n {
            for j in (i + 1)..n {
                total += 1;
                agree += u64::from((a[i] == a[j]) == (b[i] == b[j]));
            }
        }
        let got = rand_index(&a, &b).map_err(|e| e.to_string())?;
        if got != agree as f64 / total as f64 {
            return Err(format!("case {case}: {got} vs {}", agree as f64 / total as f64));
        }
    }
    let secs = within("rand index oracle", start, 5.0)?;
    Ok(format!("200/200 exact, {secs:.3}s"))
}

fn best_by_permutation(pred: &[usize], actual: &[usize], slots: usize) -> usize {
    fn go(pos: usize, used: &mut Vec<bool>, perm: &mut Vec<usize>, pred: &[usize], actual: &[usize], best: &mut usize) {
        if pos == used.len() {
            let hits = pred.iter().zip(actual).filter(|(&p, &a)| perm[p] == a).count();
            *best = (*best).max(hits);
            return;
        }
        for s in 0..used.len() {
            if !used[s] {
                used[s] = true;
                perm.push(s);
                go(pos + 1, used, perm, pred, actual, best);
                perm.pop();
                used[s] = false;
            }
        }
    }
    let mut best = 0;
    go(0, &mut vec![false; slots], &mut Vec::new(), pred, actual, &mut best);
    best
}

fn c6_accuracy() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for case in 0..100 {
        let n = rng.random_range(2..=30);
        let (c, k) = (rng.random_range(1..=4), rng.random_range(1..=4));
        let pred = random_labels(&mut rng, n, c);
        let actual = random_labels(&mut rng, n, k);
        let slots = pred.iter().chain(&actual).max().unwrap() + 1;
        let want = best_by_permutation(&pred, &actual, slots);
        let got = accuracy(&pred, &actual).map_err(|e| e.to_string())?.correct;
        if got != want {
            return Err(format!("case {case}: {got} correct vs brute force {want}"));
        }
    }
    Ok("100/100 exact".into())
}

/// Q from rank-sum spread over the tie-adjusted rank variance.
fn reference_q(scores: &Array2<f64>) -> f64 {
    let (n, k) = scores.dim();
    let rank = |i: usize, v: f64| {
        let row = scores.row(i);
        row.iter().filter(|&&x| x < v).count() as f64 + (row.iter().filter(|&&x| x == v).count() as f64 + 1.0) / 2.0
    };
    let ranks = Array2::from_shape_fn((n, k), |(i, j)| rank(i, scores[[i, j]]));
    let (nf, kf) = (n as f64, k as f64);
    let spread: f64 = (0..k).map(|j| (ranks.column(j).sum() - nf * (kf + 1.0) / 2.0).powi(2)).sum();
    let denom = ranks.iter().map(|r| r * r).sum::<f64>() - nf * kf * (kf + 1.0).powi(2) / 4.0;
    if denom <= 1e-12 {
        0.0
    } else {
        (kf - 1.0) * spread / denom
    }
}

fn c7_friedman() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let (n, k) = (rng.random_range(2..=12), rng.random_range(2..=5));
        let scores = Array2::from_shape_fn((n, k), |_| rng.random_range(0..4) as f64);
        let m = ScoreMatrix::from_scores(scores.clone(), true).map_err(|e| e.to_string())?;
        let q = friedman(&m, 0.05).map_err(|e| e.to_string())?.q_statistic;
        worst = worst.max((q - reference_q(&scores)).abs());
    }
    let hand = Array2::from_shape_fn((4, 3), |(_, j)| j as f64);
    let q8 = friedman(&ScoreMatrix::from_scores(hand, true).unwrap(), 0.05).unwrap().q_statistic;
    check(worst <= 1e-9 && q8 == 8.0, format!("max |dQ| {worst:.2e} (tol 1e-9), hand case Q = {q8}"))
}

fn c8_nemenyi() -> Outcome {
    // Mean ranks 1, 2, 3 over 9 datasets: adjacent pairs have q = 3.0.
    let scores = Array2::from_shape_fn((9, 3), |(_, j)| j as f64);
    let p = nemenyi(&ScoreMatrix::from_scores(scores, true).unwrap()).map_err(|e| e.to_string())?;
    let cases = [
        ("k=3 N=9 dR=1", p[[0, 1]], 0.087),
        ("k=4 q=3.633", studentized_range_sf(3.633, 4), 0.05),
        ("k=3 q=4.120", studentized_range_sf(4.120, 3), 0.01),
    ];
    let worst = cases.iter().map(|(_, got, want)| (got - want).abs()).fold(0.0, f64::max);
    let detail: Vec<String> = cases.iter().map(|(l, g, w)| format!("{l}: {g:.4} vs {w}")).collect();
    check(worst <= 0.005, format!("{} (tol 0.005)", detail.join("; ")))
}

fn blobs(rng: &mut ChaCha8Rng) -> Dataset {
    let c = rng.random_range(2..=4);
    let m = rng.random_range(1..=5);
    let n = rng.random_range(20..=120);
    let centers = Array2::from_shape_fn((c, m), |_| rng.random_range(-10.0..10.0));
    let points = Array2::from_shape_fn((n, m), |(i, j)| centers[[i % c, j]] + rng.random_range(-2.0..2.0));
    Dataset::from_parts(points, (0..n).map(|i| i % c).collect()).unwrap()
}

fn c9_engine() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut worst_row, mut worst_rise) = (0.0f64, f64::NEG_INFINITY);
    for seed in 0..50 {
        let data = blobs(&mut rng);
        let cfg = FcmConfig::fcm(data.n_classes(), seed);
        let run = fit_observed(&data, &cfg, |s| worst_row = worst_row.max(s.partition.max_row_error()))
            .map_err(|e| format!("dataset {seed}: {e}"))?;
        if run.iterations > cfg.max_iter {
            return Err(format!("dataset {seed}: {} iterations", run.iterations));
        }
        for w in run.objective_trace.windows(2) {
            worst_rise = worst_rise.max(w[1] - w[0]);
        }
    }
    check(
        worst_row <= PartitionMatrix::ROW_SUM_TOLERANCE && worst_rise <= 1e-9,
        format!("50 datasets: max row error {worst_row:.1e}, max objective rise {worst_rise:.1e} (tol 1e-9)"),
    )
}

fn run_bench(dir: &Path, tag: &str, timing: bool) -> Result<String, String> {
    let out = dir.join(format!("{tag}.csv"));
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_cwfcm"));
    let config = dir.join(format!("{tag}.toml"));
    std::fs::write(
        &config,
        format!(
            "seed = 11\ntrials = 3\nnoise_levels = [0, 20]\ntiming = {timing}\n\
             [[dataset]]\npath = {:?}\n[[dataset]]\npath = {:?}\nheader = true\n\
             [[method]]\npreset = \"fcm\"\n[[method]]\npreset = \"cwfcm\"\n",
            data_dir().join("iris.csv"),
            data_dir().join("wine.csv"),
        ),
    )
    .map_err(|e| e.to_string())?;
    cmd.args(["bench", "--config"]).arg(&config).arg("--output").arg(&out).arg("--summary").arg(dir.join(format!("{tag}.md")));
    let status = cmd.output().map_err(|e| e.to_string())?;
    if !status.status.success() {
        return Err(String::from_utf8_lossy(&status.stderr).into_owned());
    }
    std::fs::read_to_string(&out).map_err(|e| e.to_string())
}

fn without_seconds(csv: &str) -> Vec<String> {
    csv.lines()
        .map(|l| {
            let mut f: Vec<&str> = l.split(',').collect();
            f.remove(6);
            f.join(",")
        })
        .collect()
}

fn c10_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let a = run_bench(dir.path(), "a", false)?;
    let b = run_bench(dir.path(), "b", false)?;
    let ta = run_bench(dir.path(), "ta", true)?;
    let tb = run_bench(dir.path(), "tb", true)?;
    let rows = a.lines().count() - 1;
    check(
        a == b && without_seconds(&ta) == without_seconds(&tb) && without_seconds(&a) == without_seconds(&ta),
        format!("{rows} rows; byte-identical without timing: {}; non-time columns identical with timing: {}", a == b, without_seconds(&ta) == without_seconds(&tb)),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("iris VMR weights", c1_weights),
        ("cwfcm iris error rate", c2_cwfcm_iris),
        ("fcm iris baseline", c3_fcm_iris),
        ("initialization efficiency", c4_init_efficiency),
        ("rand index oracle", c5_rand_index),
        ("accuracy mapping oracle", c6_accuracy),
        ("friedman oracle", c7_friedman),
        ("nemenyi table check", c8_nemenyi),
        ("engine invariants", c9_engine),
        ("bench determinism", c10_determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!("{}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
