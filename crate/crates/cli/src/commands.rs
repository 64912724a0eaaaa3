use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use fate_core::data::{load_embeddings, write_csv, CsvSchema, EntanglementMode, SyntheticSpec};
use fate_core::dependence::FairnessNotion;
use fate_core::metrics::GroupAggregation;
use fate_core::nn::{ClassifierConfig, ClassifierKind};
use fate_core::tradeoff::{
    evaluate_representation, sweep, EvaluationReport, SweepMode, SweepRequest, TradeoffPoint, DEFAULT_DISTANCE_WEIGHT,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::config::{digest_of, effective_threads, RunConfig};
use crate::error::{CliError, CliResult};
use crate::export::{
    percent, read_json, write_bins_csv, write_json, write_points_csv, CsvOut, CurveExport, Meta, SCHEMA_VERSION,
};

#[derive(Debug, Parser)]
#[command(name = "fate", version, about = "Utility-fairness trade-off estimation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset as CSV plus provenance JSON.
    GenData(GenDataArgs),
    /// Run a λ × seed sweep and export the trade-off curve.
    Sweep(SweepArgs),
    /// Place a representation relative to a data-space and a label-space curve.
    EvalRepr(EvalReprArgs),
    /// Bundle curves and external points into plot-ready CSV files.
    Report(ReportArgs),
}

/// Exit status of a command that did not hit a hard error.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Status {
    Complete,
    /// Some sweep jobs failed; the message lists them.
    Partial(String),
}

fn parse_serde<T: DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|e| e.to_string())
}

fn parse_notion(s: &str) -> Result<FairnessNotion, String> {
    s.parse().map_err(|e: fate_core::FateError| e.to_string())
}

#[derive(Debug, Args)]
pub struct GenDataArgs {
    /// JSON spec file; flags below override its fields.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub target_classes: Option<usize>,
    #[arg(long)]
    pub sensitive_classes: Option<usize>,
    #[arg(long)]
    pub rho: Option<f64>,
    /// separable | entangled | radial
    #[arg(long, value_parser = parse_serde::<EntanglementMode>)]
    pub mode: Option<EntanglementMode>,
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value = "data.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Serialize)]
struct ProvenanceFile<'a> {
    schema: u32,
    meta: Meta,
    spec: &'a SyntheticSpec,
    rows: usize,
    cols: usize,
    data_file: String,
}

pub fn provenance_path(csv: &Path) -> PathBuf {
    csv.with_extension("provenance.json")
}

pub fn gen_data(args: &GenDataArgs) -> CliResult<Status> {
    let mut spec: SyntheticSpec = match &args.spec {
        Some(path) => {
            read_json(path)
                .map_err(|e| if e.kind == "SchemaError" { CliError::new("BadSpec", e.message) } else { e })?
        }
        None => SyntheticSpec::default(),
    };
    macro_rules! apply {
        ($($field:ident <- $arg:ident),*) => {$(if let Some(v) = args.$arg { spec.$field = v; })*};
    }
    apply!(n <- n, d <- d, num_target_classes <- target_classes, num_sensitive_classes <- sensitive_classes,
           rho <- rho, mode <- mode, noise <- noise, seed <- seed);
    spec.validate()?;
    let dataset = fate_core::data::generate_synthetic(&spec)?;
    if let Some(dir) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    write_csv(&dataset, &args.out)?;
    let provenance = provenance_path(&args.out);
    write_json(
        &provenance,
        &ProvenanceFile {
            schema: SCHEMA_VERSION,
            meta: Meta::now(digest_of(&spec)),
            spec: &spec,
            rows: dataset.len(),
            cols: dataset.dim(),
            data_file: args.out.display().to_string(),
        },
    )?;
    println!("{}", serde_json::json!({ "data": args.out, "provenance": provenance, "rows": dataset.len() }));
    Ok(Status::Complete)
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// dst | lst; overrides the config.
    #[arg(long, value_parser = parse_serde::<SweepMode>)]
    pub mode: Option<SweepMode>,
    /// dp | eo | eoo; overrides the config.
    #[arg(long, value_parser = parse_notion)]
    pub notion: Option<FairnessNotion>,
    /// RunConfig JSON; missing fields take their defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory; overrides the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub const CONFIG_FILE: &str = "config.json";
pub const CURVE_FILE: &str = "curve.json";
pub const POINTS_FILE: &str = "points.csv";

pub fn run_sweep(args: &SweepArgs) -> CliResult<Status> {
    let mut config = match &args.config {
        Some(path) => RunConfig::read(path)?,
        None => RunConfig::default(),
    };
    if let Some(mode) = args.mode {
        config.mode = mode;
    }
    if let Some(notion) = args.notion {
        config.notion = notion;
    }
    if let Some(out) = &args.out {
        config.output_dir = out.clone();
    }
    let dataset = config.dataset.load()?;
    let pipeline = config.pipeline();
    let curve = sweep(&SweepRequest {
        dataset: &dataset,
        mode: config.mode,
        notion: config.notion,
        lambdas: &config.lambdas,
        seeds: &config.seeds,
        root_seed: config.root_seed,
        config: &pipeline,
        bin_width: config.bin_width,
        threads: effective_threads(config.threads)?,
    })?;
    if curve.points.is_empty() {
        let first = &curve.failures[0];
        return Err(CliError::new(&first.kind, format!("every sweep job failed; first: {}", first.message)));
    }

    let dir = &config.output_dir;
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    write_json(&dir.join(CONFIG_FILE), &config)?;
    write_json(&dir.join(CURVE_FILE), &CurveExport::new(&curve, Meta::now(config.digest())))?;
    write_points_csv(&dir.join(POINTS_FILE), &curve.points)?;
    println!(
        "{}",
        serde_json::json!({
            "output_dir": dir,
            "config_digest": config.digest(),
            "points": curve.points.len(),
            "failures": curve.failures.len(),
        })
    );
    if curve.is_partial() {
        let gaps: Vec<String> = curve
            .failures
            .iter()
            .map(|f| format!("λ={} seed={} ({}: {})", f.lambda, f.seed, f.kind, f.message))
            .collect();
        return Ok(Status::Partial(format!(
            "{} of {} jobs failed: {}",
            gaps.len(),
            gaps.len() + curve.points.len(),
            gaps.join("; ")
        )));
    }
    Ok(Status::Complete)
}

#[derive(Debug, Args)]
pub struct EvalReprArgs {
    /// Embedding matrix (binary matrix file or headed CSV).
    #[arg(long)]
    pub embeddings: PathBuf,
    /// CSV with the target and sensitive columns, one row per embedding.
    #[arg(long)]
    pub labels: PathBuf,
    #[arg(long)]
    pub dst: PathBuf,
    #[arg(long)]
    pub lst: PathBuf,
    #[arg(long, value_parser = parse_notion)]
    pub notion: FairnessNotion,
    #[arg(long, default_value = "y")]
    pub target: String,
    #[arg(long, default_value = "s")]
    pub sensitive: String,
    /// Weight of the fairness axis in the distance.
    #[arg(long, default_value_t = DEFAULT_DISTANCE_WEIGHT)]
    pub weight: f64,
    /// logistic | mlp-2layer
    #[arg(long, default_value = "mlp-2layer", value_parser = parse_serde::<ClassifierKind>)]
    pub classifier: ClassifierKind,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// max | mean
    #[arg(long, default_value = "max", value_parser = parse_serde::<GroupAggregation>)]
    pub aggregation: GroupAggregation,
    /// Also write the report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Output of `eval-repr`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalOutput {
    pub schema: u32,
    pub meta: Meta,
    pub report: EvaluationReport,
}

fn file_digest(path: &Path) -> CliResult<String> {
    use sha2::{Digest, Sha256};
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

pub fn eval_repr(args: &EvalReprArgs) -> CliResult<EvalOutput> {
    let dst = CurveExport::read(&args.dst)?;
    let lst = CurveExport::read(&args.lst)?;
    for (path, curve) in [(&args.dst, &dst), (&args.lst, &lst)] {
        if curve.notion.name() != args.notion.name() {
            return Err(CliError::new(
                "BadConfig",
                format!("{} holds a {} curve but --notion is {}", path.display(), curve.notion, args.notion),
            ));
        }
    }
    let dataset = load_embeddings(&args.embeddings, &args.labels, &CsvSchema::new(&args.target, &args.sensitive))?;
    let classifier = ClassifierConfig { kind: args.classifier, ..ClassifierConfig::default() }.with_seed(args.seed);
    let report = evaluate_representation(
        &dataset.x,
        &dataset,
        args.notion,
        &dst.points,
        &lst.points,
        &classifier,
        args.aggregation,
        args.weight,
    )?;
    let inputs = [&args.embeddings, &args.labels, &args.dst, &args.lst]
        .iter()
        .map(|p| file_digest(p))
        .collect::<CliResult<Vec<_>>>()?;
    let digest = digest_of(&serde_json::json!({
        "inputs": inputs,
        "notion": args.notion,
        "target": args.target,
        "sensitive": args.sensitive,
        "weight": args.weight,
        "classifier": args.classifier,
        "seed": args.seed,
        "aggregation": args.aggregation,
    }));
    let output = EvalOutput { schema: SCHEMA_VERSION, meta: Meta::now(digest), report };
    if let Some(path) = &args.out {
        write_json(path, &output)?;
    }
    Ok(output)
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long, num_args = 1.., required = true)]
    pub curves: Vec<PathBuf>,
    /// `eval-repr` outputs or bare points.
    #[arg(long, num_args = 0..)]
    pub points: Vec<PathBuf>,
    #[arg(long, default_value = "fate-report")]
    pub out: PathBuf,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum PointFile {
    Evaluation(EvalOutput),
    One(TradeoffPoint),
    Many(Vec<TradeoffPoint>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub file: String,
    pub kind: String,
    pub rows: usize,
    pub input: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema: u32,
    pub meta: Meta,
    pub files: Vec<ManifestEntry>,
}

pub const MANIFEST_FILE: &str = "manifest.json";
pub const SCATTER_FILE: &str = "points.csv";

pub fn report(args: &ReportArgs) -> CliResult<Manifest> {
    let curves = args.curves.iter().map(|p| CurveExport::read(p)).collect::<CliResult<Vec<_>>>()?;
    let mut scatter: Vec<(String, TradeoffPoint, Option<EvaluationReport>)> = Vec::new();
    for path in &args.points {
        let label = path.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
        match read_json::<PointFile>(path)? {
            PointFile::Evaluation(e) => scatter.push((label, e.report.point, Some(e.report))),
            PointFile::One(p) => scatter.push((label, p, None)),
            PointFile::Many(ps) => scatter.extend(ps.into_iter().map(|p| (label.clone(), p, None))),
        }
    }

    std::fs::create_dir_all(&args.out).map_err(|e| CliError::io(&args.out, e))?;
    let mut files = Vec::new();
    for (k, (curve, path)) in curves.iter().zip(&args.curves).enumerate() {
        let name = format!("curve-{}-{}-{}.csv", k + 1, curve.source, curve.notion);
        let rows = write_bins_csv(&args.out.join(&name), curve.source, &curve.bins)?;
        files.push(ManifestEntry { file: name, kind: "curve".into(), rows, input: Some(path.display().to_string()) });
    }
    if !scatter.is_empty() {
        let mut out = CsvOut::create(
            &args.out.join(SCATTER_FILE),
            &["label", "source", "unfairness", "accuracy", "region", "dist_dst", "dist_lst"],
        )?;
        for (label, p, report) in &scatter {
            let (region, dd, dl) = match report {
                Some(r) => (
                    serde_json::to_value(r.region).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(),
                    r.dist_dst.to_string(),
                    r.dist_lst.to_string(),
                ),
                None => (String::new(), String::new(), String::new()),
            };
            out.row(&[
                label.clone(),
                p.source.to_string(),
                percent(p.unfairness).to_string(),
                percent(p.accuracy).to_string(),
                region,
                dd,
                dl,
            ])?;
        }
        let rows = out.finish()?;
        files.push(ManifestEntry { file: SCATTER_FILE.into(), kind: "points".into(), rows, input: None });
    }
    let inputs = args.curves.iter().chain(&args.points).map(|p| file_digest(p)).collect::<CliResult<Vec<_>>>()?;
    let manifest = Manifest { schema: SCHEMA_VERSION, meta: Meta::now(digest_of(&inputs)), files };
    write_json(&args.out.join(MANIFEST_FILE), &manifest)?;
    Ok(manifest)
}

pub fn run(cli: &Cli) -> CliResult<Status> {
    match &cli.command {
        Command::GenData(args) => gen_data(args),
        Command::Sweep(args) => run_sweep(args),
        Command::EvalRepr(args) => {
            let output = eval_repr(args)?;
            println!("{}", serde_json::to_string_pretty(&output).expect("report serializes"));
            Ok(Status::Complete)
        }
        Command::Report(args) => {
            let manifest = report(args)?;
            println!("{}", serde_json::to_string(&manifest).expect("manifest serializes"));
            Ok(Status::Complete)
        }
    }
}
