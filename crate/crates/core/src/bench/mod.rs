//! Reproducible experiment driver: JSON config in, `results.{csv,json}` and
//! `meta.json` out.
//!
//! A config names the schemes, the particle counts, the replicate count and
//! a mandatory seed; unknown keys are rejected. Every output row carries the
//! seed, and `meta.json` records the SHA-256 of the config bytes.
//!
//! ```
//! use resample_lab::bench::{run_experiment, ExperimentConfig, ExperimentKind};
//!
//! let cfg = ExperimentConfig::from_json(r#"{
//!     "seed": 1, "schemes": ["systematic"], "replicates": 1000,
//!     "system": {"kind": "explicit", "weights": [0.5, 0.5, 0.5, 2.5]}
//! }"#)?;
//! let rows = run_experiment(ExperimentKind::Diagnose, &cfg)?;
//! let cov = rows.iter().find(|r| r.metric == "cov_1_3").unwrap();
//! assert!((cov.value - 0.25).abs() < 0.02);
//! # Ok::<(), resample_lab::bench::BenchError>(())
//! ```

mod config;
mod experiments;
mod output;

pub use config::{ExperimentConfig, ExperimentKind, Formalism, ModelSpec, OutputFormat, SystemSpec};
pub use experiments::{
    model_data, run_diagnose, run_experiment, run_pf_oracle, run_pf_variance, run_rate,
    MAX_COVARIANCE_N,
};
pub use output::{
    format_float, results_file_name, sha256_hex, write_csv, write_json, write_outputs, Meta,
    ResultRow, RowKind, CSV_HEADER,
};

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("config error at {path}: {message}")]
    Config { path: String, message: String },
    #[error("numerical failure in experiment {experiment}: {source}")]
    Numerical {
        experiment: String,
        #[source]
        source: crate::Error,
    },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl BenchError {
    /// Process exit code: 2 for config errors, 3 for numerical failures, 1 for i/o.
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Config { .. } => 2,
            BenchError::Numerical { .. } => 3,
            BenchError::Io(_) => 1,
        }
    }
}
