//! Fuzzy c-means clustering with pluggable distances, fuzzified
//! variance-to-mean-ratio feature weights and a deterministic SF-based
//! initial partition, plus external validation and rank-based statistics
//! for comparing clustering methods across datasets.
//!
//! ```no_run
//! use cwfcm::{dataset, engine, evaluation};
//!
//! let iris = dataset::load_csv("data/iris.csv", &Default::default()).unwrap();
//! let run = engine::fit(&iris, &engine::FcmConfig::cwfcm(3)).unwrap();
//! let report = evaluation::evaluate(&run.crisp_labels, iris.labels()).unwrap();
//! println!("error rate {:.3}% after {} iterations", report.error_rate, run.iterations);
//! ```

pub mod dataset;
pub mod distance;
pub mod engine;
mod error;
pub mod evaluation;
pub mod stats;
pub mod weighting;

pub use dataset::{add_noise, load_csv, CsvOptions, Dataset, LabelColumn, NoiseSpec};
pub use distance::{DistanceSpec, Metric};
pub use engine::{fit, DistancePower, FcmConfig, Init, PartitionMatrix, RunResult};
pub use error::{Error, Result};
pub use evaluation::{evaluate, EvaluationReport};
pub use stats::{friedman, nemenyi, FriedmanResult, ScoreMatrix};
pub use weighting::{feature_weights, WeightScheme, WeightVector};
