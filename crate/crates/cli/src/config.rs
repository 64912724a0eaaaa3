use std::path::{Path, PathBuf};

use fate_core::data::{generate_synthetic, load_csv, load_embeddings, CsvSchema, Dataset, SyntheticSpec};
use fate_core::dependence::FairnessNotion;
use fate_core::encoder::{EncoderConfig, RhsScaling, DEFAULT_GAMMA};
use fate_core::kernels::KernelConfig;
use fate_core::metrics::GroupAggregation;
use fate_core::nn::{ClassifierConfig, SgdConfig};
use fate_core::tradeoff::{default_lambda_grid, PipelineConfig, SweepMode, DEFAULT_BIN_WIDTH};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case")]
pub enum DatasetSource {
    Synthetic(SyntheticSpec),
    Csv { path: PathBuf, schema: CsvSchema },
    Embeddings { path: PathBuf, labels: PathBuf, schema: CsvSchema },
}

impl DatasetSource {
    pub fn load(&self) -> CliResult<Dataset> {
        Ok(match self {
            DatasetSource::Synthetic(spec) => generate_synthetic(spec)?,
            DatasetSource::Csv { path, schema } => load_csv(path, schema)?,
            DatasetSource::Embeddings { path, labels, schema } => load_embeddings(path, labels, schema)?,
        })
    }
}

impl Default for DatasetSource {
    fn default() -> Self {
        DatasetSource::Synthetic(SyntheticSpec::default())
    }
}

/// Everything a sweep depends on. Written into the output directory and
/// hashed into the export's digest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub dataset: DatasetSource,
    pub mode: SweepMode,
    #[serde(with = "notion_format")]
    pub notion: FairnessNotion,
    pub lambdas: Vec<f64>,
    pub seeds: Vec<u64>,
    pub root_seed: u64,
    pub kernel: KernelConfig,
    pub gamma: f64,
    pub r: Option<usize>,
    pub theorem_rhs: RhsScaling,
    pub extractor_widths: Vec<usize>,
    pub sgd: SgdConfig,
    pub rounds: usize,
    pub classifier: ClassifierConfig,
    pub aggregation: GroupAggregation,
    pub lst_include_x: bool,
    pub holdout: Option<f64>,
    pub bin_width: f64,
    pub threads: Option<usize>,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        let pipeline = PipelineConfig::default();
        RunConfig {
            dataset: DatasetSource::default(),
            mode: SweepMode::Dst,
            notion: FairnessNotion::Dp,
            lambdas: default_lambda_grid(),
            seeds: (0..5).collect(),
            root_seed: 0,
            kernel: pipeline.kernel,
            gamma: DEFAULT_GAMMA,
            r: None,
            theorem_rhs: RhsScaling::Tau,
            extractor_widths: pipeline.extractor_widths,
            sgd: pipeline.sgd,
            rounds: pipeline.rounds,
            classifier: pipeline.classifier,
            aggregation: pipeline.aggregation,
            lst_include_x: false,
            holdout: None,
            bin_width: DEFAULT_BIN_WIDTH,
            threads: None,
            output_dir: PathBuf::from("fate-out"),
        }
    }
}

impl RunConfig {
    pub fn read(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::new("BadConfig", format!("{}: {e}", path.display())))
    }

    pub fn pipeline(&self) -> PipelineConfig {
        PipelineConfig {
            kernel: self.kernel.clone(),
            encoder: EncoderConfig { gamma: self.gamma, r: self.r, rhs: self.theorem_rhs },
            extractor_widths: self.extractor_widths.clone(),
            sgd: self.sgd.clone(),
            rounds: self.rounds,
            classifier: self.classifier.clone(),
            aggregation: self.aggregation,
            lst_include_x: self.lst_include_x,
            holdout: self.holdout,
        }
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Digest of everything that affects the numbers; the output directory
    /// and worker count are left out.
    pub fn digest(&self) -> String {
        digest_of(&RunConfig { output_dir: PathBuf::new(), threads: None, ..self.clone() })
    }
}

/// Notions read as either a bare name (`"eo"`) or the tagged object form.
pub mod notion_format {
    use fate_core::dependence::FairnessNotion;
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(notion: &FairnessNotion, s: S) -> Result<S::Ok, S::Error> {
        notion.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<FairnessNotion, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Name(String),
            Full(FairnessNotion),
        }
        match Repr::deserialize(d)? {
            Repr::Name(name) => name.parse().map_err(D::Error::custom),
            Repr::Full(notion) => Ok(notion),
        }
    }
}

/// Hex SHA-256 of the compact JSON form of `value`.
pub fn digest_of<T: Serialize>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("value serializes");
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// `FATE_THREADS` wins over the config file.
pub fn effective_threads(config: Option<usize>) -> CliResult<Option<usize>> {
    match std::env::var("FATE_THREADS") {
        Ok(v) if !v.trim().is_empty() => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::new("BadConfig", format!("FATE_THREADS must be a positive integer, got `{v}`"))),
        },
        _ => Ok(config),
    }
}
