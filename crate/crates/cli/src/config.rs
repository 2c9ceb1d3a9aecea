//! Method presets and the TOML benchmark configuration.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use cwfcm::distance::{DistanceSpec, Metric};
use cwfcm::engine::{DistancePower, FcmConfig, Init};
use cwfcm::{CsvOptions, LabelColumn, WeightScheme};
use serde::Deserialize;

/// Init choice before a seed is attached.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitKind {
    Random,
    Sf,
}

impl std::str::FromStr for InitKind {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "random" => Ok(InitKind::Random),
            "sf" | "sf_deterministic" | "deterministic" => Ok(InitKind::Sf),
            _ => bail!("unknown init {s:?} (expected random or sf)"),
        }
    }
}

impl std::fmt::Display for InitKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            InitKind::Random => "random",
            InitKind::Sf => "sf",
        })
    }
}

/// A method description with every knob optional; unset knobs fall back to
/// the preset, then to the engine defaults.
#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MethodSpec {
    pub name: Option<String>,
    pub preset: Option<String>,
    pub distance: Option<String>,
    pub weights: Option<String>,
    pub init: Option<String>,
    pub power: Option<String>,
    pub minkowski_p: Option<u32>,
    pub fuzziness: Option<f64>,
    pub epsilon: Option<f64>,
    pub max_iter: Option<usize>,
    pub normalize: Option<bool>,
}

/// Fully resolved method, minus the cluster count and seed.
#[derive(Debug, Clone, PartialEq)]
pub struct Method {
    pub name: String,
    pub metric: Metric,
    pub minkowski_p: u32,
    pub weights: WeightScheme,
    pub init: InitKind,
    pub power: DistancePower,
    pub fuzziness: f64,
    pub epsilon: f64,
    pub max_iter: usize,
    pub normalize: bool,
}

impl Method {
    pub fn preset(name: &str) -> Result<Self> {
        let base = FcmConfig::new(2);
        let (metric, weights, init, power) = match name {
            "fcm" => (Metric::Euclidean, WeightScheme::None, InitKind::Random, DistancePower::Squared),
            "cwfcm" => (Metric::Canberra, WeightScheme::Vmr, InitKind::Sf, DistancePower::Linear),
            _ => bail!("unknown preset {name:?} (expected fcm or cwfcm)"),
        };
        Ok(Self {
            name: name.to_owned(),
            metric,
            minkowski_p: base.distance.minkowski_p(),
            weights,
            init,
            power,
            fuzziness: base.fuzziness,
            epsilon: base.epsilon,
            max_iter: base.max_iter,
            normalize: base.normalize,
        })
    }

    pub fn from_spec(spec: &MethodSpec) -> Result<Self> {
        let mut m = Self::preset(spec.preset.as_deref().unwrap_or("fcm"))?;
        if let Some(name) = spec.name.as_ref().or(spec.preset.as_ref()) {
            m.name = name.clone();
        }
        if let Some(d) = &spec.distance {
            m.metric = d.parse()?;
        }
        if let Some(w) = &spec.weights {
            m.weights = w.parse()?;
        }
        if let Some(i) = &spec.init {
            m.init = i.parse()?;
        }
        if let Some(p) = &spec.power {
            m.power = p.parse()?;
        }
        if let Some(p) = spec.minkowski_p {
            m.minkowski_p = p;
        }
        if let Some(z) = spec.fuzziness {
            m.fuzziness = z;
        }
        if let Some(e) = spec.epsilon {
            m.epsilon = e;
        }
        if let Some(it) = spec.max_iter {
            m.max_iter = it;
        }
        if let Some(n) = spec.normalize {
            m.normalize = n;
        }
        Ok(m)
    }

    pub fn is_deterministic(&self) -> bool {
        self.init == InitKind::Sf
    }

    pub fn config(&self, clusters: usize, seed: u64) -> Result<FcmConfig> {
        Ok(FcmConfig {
            clusters,
            fuzziness: self.fuzziness,
            epsilon: self.epsilon,
            max_iter: self.max_iter,
            init: match self.init {
                InitKind::Random => Init::Random { seed },
                InitKind::Sf => Init::SfDeterministic,
            },
            distance: DistanceSpec::new(self.metric).with_minkowski_p(self.minkowski_p)?,
            weight_scheme: self.weights,
            power: self.power,
            normalize: self.normalize,
        })
    }

    pub fn describe(&self) -> String {
        format!(
            "{} ({} / {} / {} init / {} distance{})",
            self.name,
            self.metric,
            self.weights,
            self.init,
            self.power,
            if self.normalize { " / normalized" } else { "" }
        )
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DatasetEntry {
    pub name: Option<String>,
    pub path: PathBuf,
    #[serde(default = "default_label_column")]
    pub label_column: String,
    #[serde(default)]
    pub header: bool,
    #[serde(default = "default_delimiter")]
    pub delimiter: char,
    /// Defaults to the number of classes.
    pub clusters: Option<usize>,
}

fn default_label_column() -> String {
    "last".into()
}

fn default_delimiter() -> char {
    ','
}

impl DatasetEntry {
    pub fn display_name(&self) -> String {
        self.name.clone().unwrap_or_else(|| {
            self.path.file_stem().map_or_else(|| self.path.display().to_string(), |s| s.to_string_lossy().into())
        })
    }

    pub fn csv_options(&self) -> Result<CsvOptions> {
        csv_options(&self.label_column, self.delimiter, self.header)
    }
}

pub fn csv_options(label_column: &str, delimiter: char, header: bool) -> Result<CsvOptions> {
    if !delimiter.is_ascii() {
        bail!("delimiter must be a single ASCII character");
    }
    Ok(CsvOptions {
        label_column: label_column.parse::<LabelColumn>()?,
        delimiter: delimiter as u8,
        has_header: header,
    })
}

fn default_trials() -> usize {
    10
}

fn default_noise() -> Vec<f64> {
    vec![0.0, 10.0, 20.0, 30.0]
}

fn default_true() -> bool {
    true
}

/// Benchmark sweep description.
///
/// ```toml
/// seed = 2019
/// trials = 10
/// noise_levels = [0, 10, 20, 30]
///
/// [[dataset]]
/// path = "data/iris.csv"
///
/// [[method]]
/// preset = "fcm"
///
/// [[method]]
/// preset = "cwfcm"
/// ```
#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_noise")]
    pub noise_levels: Vec<f64>,
    /// Record wall time per fit; off leaves the `seconds` column empty.
    #[serde(default = "default_true")]
    pub timing: bool,
    #[serde(default = "default_true")]
    pub parallel: bool,
    #[serde(rename = "dataset")]
    pub datasets: Vec<DatasetEntry>,
    #[serde(rename = "method")]
    pub methods: Vec<MethodSpec>,
}

impl BenchConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).context("invalid bench config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Loads a config; relative dataset paths resolve against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        let mut cfg = Self::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for d in &mut cfg.datasets {
            if d.path.is_relative() {
                d.path = base.join(&d.path);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            bail!("trials must be >= 1");
        }
        if let Some(bad) = self.noise_levels.iter().find(|l| !(0.0..=100.0).contains(*l)) {
            bail!("noise level {bad} outside [0, 100]");
        }
        if self.noise_levels.is_empty() {
            bail!("at least one noise level is required");
        }
        if self.datasets.is_empty() || self.methods.is_empty() {
            bail!("need at least one dataset and one method");
        }
        let methods = self.resolved_methods()?;
        for (i, m) in methods.iter().enumerate() {
            if methods[..i].iter().any(|o| o.name == m.name) {
                bail!("duplicate method name {:?}", m.name);
            }
        }
        Ok(())
    }

    pub fn resolved_methods(&self) -> Result<Vec<Method>> {
        self.methods.iter().map(Method::from_spec).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets() {
        let c = Method::preset("cwfcm").unwrap();
        assert_eq!(c.metric, Metric::Canberra);
        assert_eq!(c.weights, WeightScheme::Vmr);
        assert!(c.is_deterministic());
        let cfg = c.config(3, 9).unwrap();
        assert_eq!(cfg, FcmConfig::cwfcm(3));
        assert_eq!(Method::preset("fcm").unwrap().config(3, 9).unwrap(), FcmConfig::fcm(3, 9));
        assert!(Method::preset("kmeans").is_err());
    }

    #[test]
    fn spec_overrides_preset() {
        let spec = MethodSpec {
            name: Some("canb-entropy".into()),
            preset: Some("cwfcm".into()),
            weights: Some("entropy".into()),
            init: Some("random".into()),
            ..Default::default()
        };
        let m = Method::from_spec(&spec).unwrap();
        assert_eq!(m.name, "canb-entropy");
        assert_eq!(m.weights, WeightScheme::Entropy);
        assert_eq!(m.init, InitKind::Random);
        assert_eq!(m.power, DistancePower::Linear);
    }

    #[test]
    fn parses_config_with_defaults() {
        let cfg = BenchConfig::parse(
            r#"
            seed = 5
            [[dataset]]
            path = "iris.csv"
            [[method]]
            preset = "fcm"
            [[method]]
            preset = "cwfcm"
            "#,
        )
        .unwrap();
        assert_eq!(cfg.trials, 10);
        assert_eq!(cfg.noise_levels, vec![0.0, 10.0, 20.0, 30.0]);
        assert!(cfg.timing);
        assert_eq!(cfg.datasets[0].display_name(), "iris");
        assert_eq!(cfg.resolved_methods().unwrap()[1].name, "cwfcm");
    }

    #[test]
    fn rejects_bad_configs() {
        let base = "[[dataset]]\npath = \"a.csv\"\n[[method]]\npreset = \"fcm\"\n";
        assert!(BenchConfig::parse(&format!("trials = 0\n{base}")).is_err());
        assert!(BenchConfig::parse(&format!("noise_levels = [120]\n{base}")).is_err());
        assert!(BenchConfig::parse(&format!("{base}[[method]]\npreset = \"fcm\"\n")).is_err());
        assert!(BenchConfig::parse(&format!("bogus = 1\n{base}")).is_err());
    }
}
