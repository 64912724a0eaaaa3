use std::io::Write;
use std::path::Path;

use fate_core::dependence::FairnessNotion;
use fate_core::tradeoff::{pareto_front, CurveBin, PointFailure, PointSource, TradeoffCurve, TradeoffPoint};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub config_digest: String,
    pub version: String,
    /// The only field allowed to differ between reruns.
    pub created: String,
}

impl Meta {
    pub fn now(config_digest: String) -> Self {
        Meta {
            config_digest,
            version: env!("CARGO_PKG_VERSION").to_string(),
            created: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        }
    }
}

/// On-disk form of a trade-off curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveExport {
    pub schema: u32,
    pub meta: Meta,
    pub source: PointSource,
    pub notion: FairnessNotion,
    pub bin_width: f64,
    pub points: Vec<TradeoffPoint>,
    pub bins: Vec<CurveBin>,
    pub pareto: Vec<TradeoffPoint>,
    #[serde(default)]
    pub failures: Vec<PointFailure>,
}

impl CurveExport {
    pub fn new(curve: &TradeoffCurve, meta: Meta) -> Self {
        CurveExport {
            schema: SCHEMA_VERSION,
            meta,
            source: curve.source,
            notion: curve.notion,
            bin_width: curve.bin_width,
            points: curve.points.clone(),
            bins: curve.bins.clone(),
            pareto: pareto_front(&curve.points),
            failures: curve.failures.clone(),
        }
    }

    pub fn to_curve(&self) -> TradeoffCurve {
        TradeoffCurve {
            source: self.source,
            notion: self.notion,
            bin_width: self.bin_width,
            points: self.points.clone(),
            bins: self.bins.clone(),
            failures: self.failures.clone(),
        }
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        let export: CurveExport = read_json(path)?;
        if export.schema != SCHEMA_VERSION {
            return Err(CliError::schema(path, format!("unsupported schema version {}", export.schema)));
        }
        if export.points.is_empty() {
            return Err(CliError::schema(path, "curve has no points"));
        }
        Ok(export)
    }
}

/// Parses JSON, reporting unreadable files as `IoError` and anything
/// malformed as `SchemaError`.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::schema(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).expect("value serializes");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Fractions in `[0, 1]` as percent.
pub fn percent(v: f64) -> f64 {
    100.0 * v
}

pub struct CsvOut {
    writer: csv::Writer<std::fs::File>,
    path: std::path::PathBuf,
    rows: usize,
}

impl CsvOut {
    pub fn create(path: &Path, header: &[&str]) -> CliResult<Self> {
        let mut writer =
            csv::Writer::from_path(path).map_err(|e| CliError::new("IoError", format!("{}: {e}", path.display())))?;
        writer.write_record(header).map_err(|e| CliError::new("IoError", e.to_string()))?;
        Ok(CsvOut { writer, path: path.to_path_buf(), rows: 0 })
    }

    pub fn row(&mut self, fields: &[String]) -> CliResult<()> {
        self.rows += 1;
        self.writer.write_record(fields).map_err(|e| CliError::new("IoError", format!("{}: {e}", self.path.display())))
    }

    pub fn finish(mut self) -> CliResult<usize> {
        self.writer.flush().map_err(|e| CliError::io(&self.path, e))?;
        Ok(self.rows)
    }
}

/// Raw sweep points: `lambda, seed, accuracy, unfairness` in percent.
pub fn write_points_csv(path: &Path, points: &[TradeoffPoint]) -> CliResult<usize> {
    let mut out = CsvOut::create(path, &["lambda", "seed", "accuracy", "unfairness"])?;
    for p in points {
        out.row(&[
            p.lambda.to_string(),
            p.seed.to_string(),
            percent(p.accuracy).to_string(),
            percent(p.unfairness).to_string(),
        ])?;
    }
    out.finish()
}

/// Binned curve: `source, unfairness, acc_mean, acc_var` with unfairness at
/// the bin center, all in percent (variance in percent²).
pub fn write_bins_csv(path: &Path, source: PointSource, bins: &[CurveBin]) -> CliResult<usize> {
    let mut out = CsvOut::create(path, &["source", "unfairness", "acc_mean", "acc_var"])?;
    for b in bins {
        out.row(&[
            source.to_string(),
            percent(b.center).to_string(),
            percent(b.accuracy_mean).to_string(),
            (1e4 * b.accuracy_var).to_string(),
        ])?;
    }
    out.finish()
}

pub fn stderr_line(line: &str) {
    let _ = writeln!(std::io::stderr(), "{line}");
}
