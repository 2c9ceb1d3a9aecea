use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cwfcm::{load_csv, CsvOptions};
use cwfcm_cli::sweep::{write_results, ResultRow};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cwfcm"))
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("spawn cwfcm")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn help_lists_every_flag() {
    let mut text = stdout(&run(bin().arg("--help")));
    for sub in ["cluster", "bench", "stats", "noise"] {
        assert!(text.contains(sub), "{sub} missing from top-level help");
        let out = run(bin().args([sub, "--help"]));
        assert!(out.status.success());
        text.push_str(&stdout(&out));
    }
    for flag in [
        "--dataset", "--label-column", "--clusters", "--distance", "--weights", "--init", "--fuzziness", "--epsilon",
        "--max-iter", "--normalize", "--seed", "--trials", "--noise", "--output", "--format", "--metric", "--alpha",
        "--results", "--config", "--power", "--preset",
    ] {
        assert!(text.contains(flag), "{flag} missing from help");
    }
}

#[test]
fn missing_dataset_names_the_path() {
    let out = run(bin().args(["cluster", "--dataset", "/no/such/file.csv"]));
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("/no/such/file.csv"));
}

#[test]
fn cluster_iris_with_assignments() {
    let dir = tempfile::tempdir().unwrap();
    let assign = dir.path().join("assign.csv");
    let out = run(bin().args(["cluster", "--format", "csv", "--dataset"]).arg(data("iris.csv")).arg("--output").arg(&assign));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("error_rate,2.667"), "{text}");
    assert!(text.contains("misclassified,4"));
    let iterations: usize = text
        .lines()
        .find_map(|l| l.strip_prefix("iterations,"))
        .and_then(|v| v.parse().ok())
        .unwrap();
    assert!(iterations <= 16);

    let rows = std::fs::read_to_string(&assign).unwrap();
    let mut lines = rows.lines();
    assert_eq!(lines.next(), Some("point,class,cluster,mu0,mu1,mu2"));
    for line in lines {
        let sum: f64 = line.split(',').skip(3).map(|v| v.parse::<f64>().unwrap()).sum();
        assert!((sum - 1.0).abs() < 1e-9);
    }
}

fn sweep_config(dir: &Path, trials: usize) -> PathBuf {
    let path = dir.join("sweep.toml");
    let text = format!(
        "trials = {trials}\nnoise_levels = [10]\ntiming = false\n\
         [[dataset]]\npath = {:?}\n[[dataset]]\npath = {:?}\nheader = true\n\
         [[method]]\npreset = \"fcm\"\n\
         [[method]]\nname = \"cwfcm-random\"\npreset = \"cwfcm\"\ninit = \"random\"\n",
        data("iris.csv"),
        data("wine.csv")
    );
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn bench_row_count_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = sweep_config(dir.path(), 10);
    let (csv, md) = (dir.path().join("r.csv"), dir.path().join("s.md"));
    let out = run(bin().args(["bench", "--config"]).arg(&cfg).arg("--output").arg(&csv).arg("--summary").arg(&md));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 1 + 40);
    assert!(text.starts_with(
        "dataset,method,noise_pct,trial,seed,iterations,seconds,objective,error_rate,accuracy_rate,rand_index,purity,failed\n"
    ));
    let summary = std::fs::read_to_string(&md).unwrap();
    assert!(summary.contains("| iris | cwfcm-random |"));
    assert!(summary.contains("40 runs, 0 failed."));

    let stats = run(bin().args(["stats", "--results"]).arg(&csv));
    assert!(stats.status.success(), "{}", String::from_utf8_lossy(&stats.stderr));
    assert!(stdout(&stats).contains("Nemenyi"));
}

#[test]
fn bench_flags_without_config() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("r.csv");
    let out = run(bin()
        .args(["bench", "--dataset"])
        .arg(data("iris.csv"))
        .args(["--trials", "2", "--noise", "0,10", "--no-timing", "--output"])
        .arg(&csv));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    // fcm: 2 trials, cwfcm: collapsed to 1, per noise level
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 1 + 2 * 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("running 1 trial"));
}

#[test]
fn failed_runs_give_nonzero_exit() {
    let dir = tempfile::tempdir().unwrap();
    // A zero-mean feature makes VMR weights undefined.
    let ds = dir.path().join("zero.csv");
    std::fs::write(&ds, "-1,1,a\n1,2,a\n-1,8,b\n1,9,b\n").unwrap();
    let csv = dir.path().join("r.csv");
    let out = run(bin().args(["bench", "--method", "cwfcm", "--noise", "0", "--dataset"]).arg(&ds).arg("--output").arg(&csv));
    assert!(!out.status.success());
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.lines().nth(1).unwrap().ends_with(",true"));
}

#[test]
fn noise_files_repeat_and_keep_layout() {
    let dir = tempfile::tempdir().unwrap();
    let paths: Vec<PathBuf> = (0..3).map(|i| dir.path().join(format!("n{i}.csv"))).collect();
    for (p, level) in paths.iter().zip(["30", "30", "0"]) {
        let out = run(bin()
            .args(["noise", "--header", "--noise", level, "--seed", "4", "--dataset"])
            .arg(data("wine.csv"))
            .arg("--output")
            .arg(p));
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let a = std::fs::read(&paths[0]).unwrap();
    assert_eq!(a, std::fs::read(&paths[1]).unwrap());

    let original = std::fs::read_to_string(data("wine.csv")).unwrap();
    let noisy = String::from_utf8(a).unwrap();
    assert_eq!(original.lines().next(), noisy.lines().next());

    let opts = CsvOptions { has_header: true, ..Default::default() };
    let clean = load_csv(data("wine.csv"), &opts).unwrap();
    let zero = load_csv(&paths[2], &opts).unwrap();
    assert_eq!(clean.points(), zero.points());
    assert_eq!(clean.labels(), zero.labels());
    assert_eq!(clean.class_names(), zero.class_names());
}

fn write_scores(dir: &Path, scores: &[[f64; 3]]) -> PathBuf {
    let rows: Vec<ResultRow> = scores
        .iter()
        .enumerate()
        .flat_map(|(d, row)| {
            row.iter().enumerate().map(move |(m, &er)| ResultRow {
                dataset: format!("d{d}"),
                method: format!("m{m}"),
                noise_pct: 0.0,
                trial: 0,
                seed: 0,
                iterations: Some(10),
                seconds: None,
                objective: Some(1.0),
                error_rate: Some(er),
                accuracy_rate: Some(100.0 - er),
                rand_index: Some(0.5),
                purity: Some(0.5),
                failed: false,
            })
        })
        .collect();
    let path = dir.join("results.csv");
    write_results(&rows, std::fs::File::create(&path).unwrap()).unwrap();
    path
}

#[test]
fn stats_on_ties_reports_zero() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_scores(dir.path(), &[[5.0, 5.0, 5.0]; 4]);
    let out = run(bin().args(["stats", "--format", "csv", "--results"]).arg(&path));
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("q_observed,0\n"), "{text}");
    assert!(text.contains("m0,1,1,1\n"));
}

#[test]
fn stats_flags_dominant_method() {
    let dir = tempfile::tempdir().unwrap();
    let scores: Vec<[f64; 3]> = (0..8).map(|d| [1.0 + d as f64, 5.0 + d as f64, 6.0 + d as f64 * 0.5 + (d % 2) as f64 * 4.0]).collect();
    let path = write_scores(dir.path(), &scores);
    let out = run(bin().args(["stats", "--metric", "error_rate", "--alpha", "0.05", "--results"]).arg(&path));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("- m0 vs m2"), "{text}");

    // p-matrix in csv form is symmetric with a unit diagonal
    let out = run(bin().args(["stats", "--format", "csv", "--results"]).arg(&path));
    let text = stdout(&out);
    let matrix: Vec<Vec<f64>> = text
        .lines()
        .skip_while(|l| !l.starts_with("method,"))
        .skip(1)
        .map(|l| l.split(',').skip(1).map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(matrix.len(), 3);
    for (i, row) in matrix.iter().enumerate() {
        assert_eq!(row[i], 1.0);
        for (j, &p) in row.iter().enumerate() {
            assert_eq!(p, matrix[j][i]);
        }
    }
}

#[test]
fn stats_rejects_unknown_metric_and_bad_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_scores(dir.path(), &[[1.0, 2.0, 3.0]; 3]);
    assert!(!run(bin().args(["stats", "--metric", "speed", "--results"]).arg(&path)).status.success());
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "x,y\n1,2\n").unwrap();
    assert!(!run(bin().args(["stats", "--results"]).arg(&bad)).status.success());
}
