//! Subcommand arguments and their implementations.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use cwfcm::dataset::write_csv;
use cwfcm::{add_noise, evaluate, fit, load_csv, CsvOptions, Dataset, NoiseSpec};

use crate::config::{csv_options, BenchConfig, DatasetEntry, Method, MethodSpec};
use crate::report::{markdown_summary, StatsReport};
use crate::sweep::{read_results, run_bench, write_results, ResultRow};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    Csv,
    #[default]
    Markdown,
}

/// How to read a dataset file.
#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// Dataset CSV file
    #[arg(long)]
    pub dataset: PathBuf,
    #[command(flatten)]
    pub layout: LayoutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct LayoutArgs {
    /// Label column: 0-based index or "last"
    #[arg(long, default_value = "last")]
    pub label_column: String,
    /// Field delimiter
    #[arg(long, default_value_t = ',')]
    pub delimiter: char,
    /// First line is a header
    #[arg(long)]
    pub header: bool,
}

impl LayoutArgs {
    pub fn options(&self) -> Result<CsvOptions> {
        csv_options(&self.label_column, self.delimiter, self.header)
    }
}

impl DataArgs {
    pub fn load(&self) -> Result<Dataset> {
        Ok(load_csv(&self.dataset, &self.layout.options()?)?)
    }
}

/// Method selection; unset flags fall back to the preset.
#[derive(Debug, Clone, Default, Args)]
pub struct MethodArgs {
    /// Starting preset: fcm or cwfcm
    #[arg(long, default_value = "cwfcm")]
    pub preset: String,
    /// euclidean, cityblock, minkowski, canberra or mahalanobis
    #[arg(long)]
    pub distance: Option<String>,
    /// none, vmr, entropy, variance, stddev or mean
    #[arg(long)]
    pub weights: Option<String>,
    /// random or sf
    #[arg(long)]
    pub init: Option<String>,
    /// How the distance enters the objective: squared or linear
    #[arg(long)]
    pub power: Option<String>,
    #[arg(long)]
    pub minkowski_p: Option<u32>,
    /// Fuzziness exponent z > 1
    #[arg(long)]
    pub fuzziness: Option<f64>,
    /// Stop when the objective changes by less than this
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Min-max scale features before clustering
    #[arg(long)]
    pub normalize: bool,
}

impl MethodArgs {
    pub fn method(&self) -> Result<Method> {
        Method::from_spec(&MethodSpec {
            name: None,
            preset: Some(self.preset.clone()),
            distance: self.distance.clone(),
            weights: self.weights.clone(),
            init: self.init.clone(),
            power: self.power.clone(),
            minkowski_p: self.minkowski_p,
            fuzziness: self.fuzziness,
            epsilon: self.epsilon,
            max_iter: self.max_iter,
            normalize: self.normalize.then_some(true),
        })
    }
}

#[derive(Debug, Clone, Args)]
pub struct ClusterArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub method: MethodArgs,
    /// Number of clusters; defaults to the number of classes
    #[arg(long)]
    pub clusters: Option<usize>,
    /// Seed for random initialization
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write per-point crisp labels and memberships here
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// TOML sweep description
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Dataset CSV (repeatable); used when no --config is given
    #[arg(long)]
    pub dataset: Vec<PathBuf>,
    #[command(flatten)]
    pub layout: LayoutArgs,
    /// Method preset (repeatable); defaults to fcm and cwfcm
    #[arg(long)]
    pub method: Vec<String>,
    /// Repeats per random-init method
    #[arg(long)]
    pub trials: Option<usize>,
    /// Noise levels in percent, comma separated
    #[arg(long, value_delimiter = ',')]
    pub noise: Vec<f64>,
    /// Base seed
    #[arg(long)]
    pub seed: Option<u64>,
    /// Results CSV; standard output when omitted
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Markdown summary file; printed to standard error when omitted
    #[arg(long)]
    pub summary: Option<PathBuf>,
    /// Leave the seconds column empty so output is byte-reproducible
    #[arg(long)]
    pub no_timing: bool,
    /// Run fits one at a time
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Debug, Clone, Args)]
pub struct StatsArgs {
    /// Results CSV written by `bench`
    #[arg(long)]
    pub results: PathBuf,
    /// Column to rank methods by
    #[arg(long, default_value = "error_rate")]
    pub metric: String,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
    /// Write the report here instead of standard output
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct NoiseArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Noise level as a percentage of each feature's standard deviation
    #[arg(long)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Noisy dataset destination
    #[arg(long)]
    pub output: PathBuf,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn emit(text: &str, output: Option<&Path>) -> Result<()> {
    match output {
        Some(path) => {
            let mut w = create(path)?;
            w.write_all(text.as_bytes())?;
            w.flush()?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

pub fn cluster(args: &ClusterArgs) -> Result<String> {
    let data = args.data.load()?;
    let method = args.method.method()?;
    let clusters = args.clusters.unwrap_or_else(|| data.n_classes().max(2));
    let config = method.config(clusters, args.seed)?;
    let run = fit(&data, &config)?;
    let eval = evaluate(&run.crisp_labels, data.labels())?;

    if let Some(path) = &args.output {
        let mut wtr = csv::Writer::from_writer(create(path)?);
        let mut header = vec!["point".to_owned(), "class".into(), "cluster".into()];
        header.extend((0..clusters).map(|k| format!("mu{k}")));
        wtr.write_record(&header)?;
        let mu = run.partition.view();
        for (i, (&label, &cl)) in data.labels().iter().zip(&run.crisp_labels).enumerate() {
            let mut rec = vec![i.to_string(), data.class_names()[label].clone(), cl.to_string()];
            rec.extend(mu.row(i).iter().map(|v| v.to_string()));
            wtr.write_record(&rec)?;
        }
        wtr.flush()?;
    }

    let fields: [(&str, String); 11] = [
        ("method", method.describe()),
        ("clusters", clusters.to_string()),
        ("iterations", run.iterations.to_string()),
        ("converged", run.converged.to_string()),
        ("seconds", format!("{:.6}", run.wall_time)),
        ("objective", format!("{:.6}", run.final_objective())),
        ("error_rate", format!("{:.3}", eval.error_rate)),
        ("accuracy_rate", format!("{:.3}", eval.accuracy_rate)),
        ("misclassified", eval.misclassified.to_string()),
        ("rand_index", format!("{:.4}", eval.rand_index)),
        ("purity", format!("{:.4}", eval.purity)),
    ];
    let mut out = String::new();
    match args.format {
        Format::Markdown => {
            let _ = writeln!(out, "| Field | Value |\n|---|---|");
            for (k, v) in &fields {
                let _ = writeln!(out, "| {k} | {v} |");
            }
        }
        Format::Csv => {
            let mut wtr = csv::Writer::from_writer(Vec::new());
            wtr.write_record(["field", "value"])?;
            for (k, v) in &fields {
                wtr.write_record([*k, v.as_str()])?;
            }
            out = String::from_utf8(wtr.into_inner()?)?;
        }
    }
    Ok(out)
}

/// Builds the sweep config from a file and/or flags. Flags override the file.
pub fn bench_config(args: &BenchArgs) -> Result<BenchConfig> {
    let mut cfg = match &args.config {
        Some(path) => BenchConfig::load(path)?,
        None => {
            if args.dataset.is_empty() {
                bail!("bench needs --config or at least one --dataset");
            }
            let methods = if args.method.is_empty() { vec!["fcm".into(), "cwfcm".into()] } else { args.method.clone() };
            BenchConfig {
                seed: 0,
                trials: 10,
                noise_levels: vec![0.0, 10.0, 20.0, 30.0],
                timing: true,
                parallel: true,
                datasets: args
                    .dataset
                    .iter()
                    .map(|p| DatasetEntry {
                        name: None,
                        path: p.clone(),
                        label_column: args.layout.label_column.clone(),
                        header: args.layout.header,
                        delimiter: args.layout.delimiter,
                        clusters: None,
                    })
                    .collect(),
                methods: methods
                    .into_iter()
                    .map(|p| MethodSpec { preset: Some(p), ..Default::default() })
                    .collect(),
            }
        }
    };
    if let Some(t) = args.trials {
        cfg.trials = t;
    }
    if !args.noise.is_empty() {
        cfg.noise_levels = args.noise.clone();
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if args.no_timing {
        cfg.timing = false;
    }
    if args.sequential {
        cfg.parallel = false;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Runs the sweep, writes the CSV and summary, and returns the rows.
pub fn bench(args: &BenchArgs) -> Result<Vec<ResultRow>> {
    let cfg = bench_config(args)?;
    for m in cfg.resolved_methods()? {
        if m.is_deterministic() && cfg.trials > 1 {
            eprintln!("note: {} has a deterministic init; running 1 trial instead of {}", m.name, cfg.trials);
        }
    }
    let rows = run_bench(&cfg)?;
    match &args.output {
        Some(path) => {
            let mut w = create(path)?;
            write_results(&rows, &mut w)?;
            w.flush()?;
        }
        None => write_results(&rows, std::io::stdout().lock())?,
    }
    let summary = markdown_summary(&rows);
    match &args.summary {
        Some(path) => emit(&summary, Some(path))?,
        None => eprint!("{summary}"),
    }
    Ok(rows)
}

pub fn stats(args: &StatsArgs) -> Result<String> {
    let file = File::open(&args.results).with_context(|| format!("cannot read {}", args.results.display()))?;
    let rows = read_results(file).with_context(|| format!("reading {}", args.results.display()))?;
    let report = StatsReport::compute(&rows, &args.metric, args.alpha)?;
    let text = match args.format {
        Format::Markdown => report.markdown(),
        Format::Csv => report.csv(),
    };
    emit(&text, args.output.as_deref())?;
    Ok(text)
}

pub fn noise(args: &NoiseArgs) -> Result<()> {
    let options = args.data.layout.options()?;
    let data = args.data.load()?;
    let noisy = add_noise(&data, &NoiseSpec::new(args.noise, args.seed)?);
    let mut w = create(&args.output)?;
    if options.has_header {
        // Copy the original header verbatim, including the label column's name.
        let mut rdr = csv::ReaderBuilder::new()
            .delimiter(options.delimiter)
            .has_headers(true)
            .from_path(&args.data.dataset)
            .with_context(|| format!("cannot read {}", args.data.dataset.display()))?;
        let header = rdr.headers()?.clone();
        let mut hw = csv::WriterBuilder::new().delimiter(options.delimiter).from_writer(&mut w);
        hw.write_record(header.iter().map(str::trim))?;
        hw.flush()?;
    }
    write_csv(&noisy, &mut w, &CsvOptions { has_header: false, ..options })?;
    w.flush()?;
    Ok(())
}
