//! Command-line driver for the experiments in `resample_lab::bench`.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use resample_lab::bench::{self, BenchError, ExperimentConfig, ExperimentKind, OutputFormat};

/// Output directory used when `--out` is not given.
const OUT_DIR_ENV: &str = "RESAMPLE_BENCH_OUT";

#[derive(Parser)]
#[command(name = "resample-bench", version, about = "Reproducible resampling experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Unbiasedness, support and count-covariance tables.
    Diagnose(Args),
    /// Log-log variance-rate fits.
    Rate(Args),
    /// Per-step log-likelihood variance of the particle filter, and ratios between schemes.
    PfVariance(Args),
    /// Particle-filter likelihood against the exact Kalman likelihood.
    PfOracle(Args),
}

#[derive(clap::Args)]
struct Args {
    #[arg(long)]
    config: PathBuf,
    /// Output directory [default: $RESAMPLE_BENCH_OUT, else ./bench-out]
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    jobs: Option<usize>,
    /// Overrides the config's `format`.
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
}

fn run(kind: ExperimentKind, args: &Args) -> Result<PathBuf, BenchError> {
    let bytes = std::fs::read(&args.config).map_err(|e| BenchError::Config {
        path: "<file>".into(),
        message: format!("{}: {e}", args.config.display()),
    })?;
    let text = String::from_utf8(bytes.clone()).map_err(|_| BenchError::Config {
        path: "<file>".into(),
        message: "config is not UTF-8".into(),
    })?;
    let config = ExperimentConfig::from_json(&text)?;
    let format = args.format.or(config.format).unwrap_or_default();
    let out = args
        .out
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("bench-out"));
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = args.jobs {
        if jobs == 0 {
            return Err(BenchError::Config {
                path: "--jobs".into(),
                message: "must be >= 1".into(),
            });
        }
        pool = pool.num_threads(jobs);
    }
    let pool = pool.build().map_err(|e| std::io::Error::other(e.to_string()))?;
    let rows = pool.install(|| bench::run_experiment(kind, &config))?;
    bench::write_outputs(&out, kind, &bytes, config.seed, format, &rows)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match &cli.command {
        Command::Diagnose(a) => (ExperimentKind::Diagnose, a),
        Command::Rate(a) => (ExperimentKind::Rate, a),
        Command::PfVariance(a) => (ExperimentKind::PfVariance, a),
        Command::PfOracle(a) => (ExperimentKind::PfOracle, a),
    };
    match run(kind, args) {
        Ok(path) => {
            eprintln!("wrote {}", path.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("resample-bench {}: {e}", kind.name());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
