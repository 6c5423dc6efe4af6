use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::{ExperimentKind, OutputFormat};
use super::BenchError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RowKind {
    Replicate,
    Aggregate,
}

impl RowKind {
    fn as_str(&self) -> &'static str {
        match self {
            RowKind::Replicate => "replicate",
            RowKind::Aggregate => "aggregate",
        }
    }
}

/// One output record. `n`, `t`, `replicate` and `se` are empty when they do not apply.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub experiment: String,
    pub scheme: String,
    pub n: Option<usize>,
    pub t: Option<usize>,
    pub kind: RowKind,
    pub replicate: Option<usize>,
    pub metric: String,
    pub value: f64,
    pub se: Option<f64>,
    pub seed: u64,
}

impl ResultRow {
    pub fn aggregate(experiment: &str, scheme: &str, metric: impl Into<String>, value: f64, seed: u64) -> Self {
        ResultRow {
            experiment: experiment.to_string(),
            scheme: scheme.to_string(),
            n: None,
            t: None,
            kind: RowKind::Aggregate,
            replicate: None,
            metric: metric.into(),
            value,
            se: None,
            seed,
        }
    }

    pub fn n(mut self, n: usize) -> Self {
        self.n = Some(n);
        self
    }

    pub fn t(mut self, t: usize) -> Self {
        self.t = Some(t);
        self
    }

    pub fn se(mut self, se: f64) -> Self {
        self.se = Some(se);
        self
    }

    pub fn replicate(mut self, r: usize) -> Self {
        self.kind = RowKind::Replicate;
        self.replicate = Some(r);
        self
    }
}

pub const CSV_HEADER: [&str; 10] = [
    "experiment", "scheme", "n", "t", "kind", "replicate", "metric", "value", "se", "seed",
];

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_csv<W: Write>(rows: &[ResultRow], out: W) -> std::io::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.experiment.clone(),
            r.scheme.clone(),
            opt(r.n),
            opt(r.t),
            r.kind.as_str().to_string(),
            opt(r.replicate),
            r.metric.clone(),
            format_float(r.value),
            r.se.map(format_float).unwrap_or_default(),
            r.seed.to_string(),
        ])?;
    }
    w.flush()
}

pub fn write_json<W: Write>(rows: &[ResultRow], mut out: W) -> std::io::Result<()> {
    serde_json::to_writer_pretty(&mut out, rows)?;
    out.write_all(b"\n")
}

/// Sidecar written next to the results: enough to trace every row back to its inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub experiment: ExperimentKind,
    pub config_sha256: String,
    pub seed: u64,
    pub format: OutputFormat,
    pub rows: usize,
    pub versions: std::collections::BTreeMap<String, String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn results_file_name(format: OutputFormat) -> &'static str {
    match format {
        OutputFormat::Csv => "results.csv",
        OutputFormat::Json => "results.json",
    }
}

/// Writes `results.{csv,json}` and `meta.json` into `dir`, creating it if needed.
pub fn write_outputs(
    dir: &Path,
    kind: ExperimentKind,
    config_bytes: &[u8],
    seed: u64,
    format: OutputFormat,
    rows: &[ResultRow],
) -> Result<PathBuf, BenchError> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(results_file_name(format));
    let file = std::io::BufWriter::new(std::fs::File::create(&path)?);
    match format {
        OutputFormat::Csv => write_csv(rows, file)?,
        OutputFormat::Json => write_json(rows, file)?,
    }
    let meta = Meta {
        experiment: kind,
        config_sha256: sha256_hex(config_bytes),
        seed,
        format,
        rows: rows.len(),
        versions: [(
            env!("CARGO_PKG_NAME").to_string(),
            env!("CARGO_PKG_VERSION").to_string(),
        )]
        .into(),
    };
    let mut text = serde_json::to_string_pretty(&meta).map_err(std::io::Error::from)?;
    let _ = writeln!(text);
    std::fs::write(dir.join("meta.json"), text)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            let s = format_float(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
            let mantissa = s.split('e').next().unwrap().replace(['-', '.'], "");
            assert_eq!(mantissa.len(), 17);
        }
    }

    #[test]
    fn csv_layout() {
        let rows = vec![
            ResultRow::aggregate("diagnose", "systematic", "cov_1_3", 0.25, 7).n(4).se(0.01),
            ResultRow::aggregate("pf", "ssp", "log_likelihood", -3.0, 7).n(8).t(2).replicate(5),
        ];
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(!text.contains('\r'));
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "experiment,scheme,n,t,kind,replicate,metric,value,se,seed");
        assert_eq!(
            lines[1],
            "diagnose,systematic,4,,aggregate,,cov_1_3,2.5000000000000000e-1,1.0000000000000000e-2,7"
        );
        assert!(lines[2].starts_with("pf,ssp,8,2,replicate,5,log_likelihood,"));
    }
}
