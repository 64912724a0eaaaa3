//! Kernel feature maps and Gram factors.
//!
//! Every kernel here is handled through a factor `L` with `L·Lᵀ = K` (or
//! `≈ K` for random Fourier features), so no n×n Gram matrix is ever built
//! on the estimation path.

use rand::seq::index::sample;
use rand_distr::{Distribution, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{FateError, Result};
use crate::linalg::{cholesky_psd, Matrix};
use crate::rng;

pub const DEFAULT_RFF_DIM: usize = 1000;
/// Rows used by the median heuristic.
pub const MEDIAN_SUBSAMPLE: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelKind {
    GaussianRff,
    Linear,
    DeltaOnehot,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Bandwidth {
    Fixed(f64),
    MedianHeuristic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelConfig {
    #[serde(default = "default_kind")]
    pub kind: KernelKind,
    #[serde(default = "default_rff_dim")]
    pub rff_dim: usize,
    #[serde(default = "default_bandwidth")]
    pub bandwidth: Bandwidth,
    #[serde(default)]
    pub seed: u64,
}

fn default_kind() -> KernelKind {
    KernelKind::GaussianRff
}

fn default_rff_dim() -> usize {
    DEFAULT_RFF_DIM
}

fn default_bandwidth() -> Bandwidth {
    Bandwidth::MedianHeuristic
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig {
            kind: KernelKind::GaussianRff,
            rff_dim: DEFAULT_RFF_DIM,
            bandwidth: Bandwidth::MedianHeuristic,
            seed: 0,
        }
    }
}

impl KernelConfig {
    pub fn gaussian(rff_dim: usize, bandwidth: Bandwidth, seed: u64) -> Self {
        KernelConfig { kind: KernelKind::GaussianRff, rff_dim, bandwidth, seed }
    }

    pub fn linear() -> Self {
        KernelConfig { kind: KernelKind::Linear, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind == KernelKind::GaussianRff && self.rff_dim == 0 {
            return Err(FateError::BadConfig("rff_dim must be >= 1".into()));
        }
        if let Bandwidth::Fixed(s) = self.bandwidth {
            if !(s > 0.0 && s.is_finite()) {
                return Err(FateError::BadConfig(format!("bandwidth must be > 0, got {s}")));
            }
        }
        Ok(())
    }

    /// Concrete σ for this data (median heuristic unless fixed).
    pub fn resolve_bandwidth(&self, x: &Matrix) -> Result<f64> {
        match self.bandwidth {
            Bandwidth::Fixed(s) => Ok(s),
            Bandwidth::MedianHeuristic => median_heuristic_bandwidth(x, rng::derive(self.seed, &[rng::TAG_BANDWIDTH])),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FactorSource {
    RffFeatures,
    Linear,
    Cholesky,
    Onehot,
}

/// A factor `L` (n×m) of a kernel Gram matrix over n samples.
#[derive(Debug, Clone)]
pub struct GramFactor {
    pub factor: Matrix,
    pub source: FactorSource,
}

impl GramFactor {
    pub fn rows(&self) -> usize {
        self.factor.rows()
    }

    pub fn dim(&self) -> usize {
        self.factor.cols()
    }

    /// Factor of an explicit PSD Gram matrix via pivoted Cholesky.
    pub fn from_gram(k: &Matrix, jitter: f64) -> Result<Self> {
        Ok(GramFactor { factor: cholesky_psd(k, jitter)?, source: FactorSource::Cholesky })
    }

    pub fn select_rows(&self, rows: &[usize]) -> GramFactor {
        GramFactor { factor: self.factor.select_rows(rows), source: self.source }
    }
}

/// Random Fourier feature map `φ(x) = √(2/D)·cos(W·x + b)` for the Gaussian
/// kernel `exp(−‖x−x′‖²/(2σ²))`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RffMap {
    /// D×d frequencies, entries ~ N(0, σ⁻²).
    pub frequencies: Matrix,
    /// D phases ~ U[0, 2π).
    pub phases: Vec<f64>,
    pub bandwidth: f64,
}

impl RffMap {
    pub fn sample(input_dim: usize, rff_dim: usize, bandwidth: f64, seed: u64) -> Result<Self> {
        if rff_dim == 0 {
            return Err(FateError::BadConfig("rff_dim must be >= 1".into()));
        }
        if !(bandwidth > 0.0 && bandwidth.is_finite()) {
            return Err(FateError::BadConfig(format!("bandwidth must be > 0, got {bandwidth}")));
        }
        let mut r = rng::stream(seed, &[rng::TAG_RFF]);
        let frequencies = Matrix::from_fn(rff_dim, input_dim, |_, _| {
            let z: f64 = StandardNormal.sample(&mut r);
            z / bandwidth
        });
        let phase = Uniform::new(0.0, std::f64::consts::TAU).expect("valid range");
        let phases = (0..rff_dim).map(|_| phase.sample(&mut r)).collect();
        Ok(RffMap { frequencies, phases, bandwidth })
    }

    pub fn input_dim(&self) -> usize {
        self.frequencies.cols()
    }

    pub fn output_dim(&self) -> usize {
        self.frequencies.rows()
    }

    fn amplitude(&self) -> f64 {
        (2.0 / self.output_dim() as f64).sqrt()
    }

    /// Pre-activations `X·Wᵀ + b` (n×D).
    pub fn preactivations(&self, x: &Matrix) -> Result<Matrix> {
        if x.cols() != self.input_dim() {
            return Err(FateError::DimensionMismatch { expected: self.input_dim(), got: x.cols() });
        }
        let mut p = x.matmul_t(&self.frequencies)?;
        for i in 0..p.rows() {
            for (v, b) in p.row_mut(i).iter_mut().zip(&self.phases) {
                *v += b;
            }
        }
        Ok(p)
    }

    pub fn features(&self, x: &Matrix) -> Result<Matrix> {
        let mut p = self.preactivations(x)?;
        let a = self.amplitude();
        p.as_mut_slice().iter_mut().for_each(|v| *v = a * v.cos());
        Ok(p)
    }
}

/// Explicit feature map defining the encoder's basis.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FeatureMap {
    Rff(RffMap),
    Linear { dim: usize },
}

impl FeatureMap {
    /// Resolves `config` against the data it will embed.
    pub fn fit(x: &Matrix, config: &KernelConfig) -> Result<Self> {
        config.validate()?;
        match config.kind {
            KernelKind::GaussianRff => {
                let sigma = config.resolve_bandwidth(x)?;
                Ok(FeatureMap::Rff(RffMap::sample(x.cols(), config.rff_dim, sigma, config.seed)?))
            }
            KernelKind::Linear => Ok(FeatureMap::Linear { dim: x.cols() }),
            KernelKind::DeltaOnehot => Err(FeatureMap::unsupported()),
        }
    }

    fn unsupported() -> FateError {
        FateError::BadConfig("the delta kernel applies to labels, not to encoder inputs".into())
    }

    pub fn input_dim(&self) -> usize {
        match self {
            FeatureMap::Rff(m) => m.input_dim(),
            FeatureMap::Linear { dim } => *dim,
        }
    }

    pub fn output_dim(&self) -> usize {
        match self {
            FeatureMap::Rff(m) => m.output_dim(),
            FeatureMap::Linear { dim } => *dim,
        }
    }

    pub fn apply(&self, x: &Matrix) -> Result<Matrix> {
        match self {
            FeatureMap::Rff(m) => m.features(x),
            FeatureMap::Linear { dim } => {
                if x.cols() != *dim {
                    return Err(FateError::DimensionMismatch { expected: *dim, got: x.cols() });
                }
                Ok(x.clone())
            }
        }
    }

    pub fn source(&self) -> FactorSource {
        match self {
            FeatureMap::Rff(_) => FactorSource::RffFeatures,
            FeatureMap::Linear { .. } => FactorSource::Linear,
        }
    }

    /// Vector-Jacobian product: given `∂J/∂φ(X)` returns `∂J/∂X`.
    pub fn backward(&self, x: &Matrix, grad_features: &Matrix) -> Result<Matrix> {
        match self {
            FeatureMap::Rff(m) => {
                let mut g = m.preactivations(x)?;
                let a = m.amplitude();
                for (p, gf) in g.as_mut_slice().iter_mut().zip(grad_features.as_slice()) {
                    *p = -a * p.sin() * gf;
                }
                g.matmul(&m.frequencies)
            }
            FeatureMap::Linear { .. } => Ok(grad_features.clone()),
        }
    }
}

/// Random Fourier features of `x` under a Gaussian-RFF config.
pub fn rff_features(x: &Matrix, config: &KernelConfig) -> Result<Matrix> {
    if config.kind != KernelKind::GaussianRff {
        return Err(FateError::BadConfig("rff_features needs kind gaussian-rff".into()));
    }
    FeatureMap::fit(x, config)?.apply(x)
}

/// Median pairwise Euclidean distance over at most 2000 seeded rows, with a
/// fallback of 1 when the median is zero.
pub fn median_heuristic_bandwidth(x: &Matrix, seed: u64) -> Result<f64> {
    let n = x.rows();
    if n < 2 {
        return Err(FateError::EmptyInput);
    }
    let rows: Vec<usize> = if n > MEDIAN_SUBSAMPLE {
        let mut r = rng::stream(seed, &[]);
        let mut idx = sample(&mut r, n, MEDIAN_SUBSAMPLE).into_vec();
        idx.sort_unstable();
        idx
    } else {
        (0..n).collect()
    };
    let mut dists = Vec::with_capacity(rows.len() * (rows.len() - 1) / 2);
    for (a, &i) in rows.iter().enumerate() {
        for &j in &rows[a + 1..] {
            let d2: f64 = x.row(i).iter().zip(x.row(j)).map(|(p, q)| (p - q) * (p - q)).sum();
            dists.push(d2.sqrt());
        }
    }
    let median = median_of(&mut dists);
    Ok(if median > 0.0 && median.is_finite() { median } else { 1.0 })
}

fn median_of(values: &mut [f64]) -> f64 {
    let len = values.len();
    let mid = len / 2;
    let (_, upper, _) = values.select_nth_unstable_by(mid, |a, b| a.total_cmp(b));
    let upper = *upper;
    if len % 2 == 1 {
        upper
    } else {
        let lower = values[..mid].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lower + upper)
    }
}

/// One-hot factor of the delta kernel on labels in `0..num_classes`.
pub fn onehot_factor(labels: &[u32], num_classes: usize) -> Result<GramFactor> {
    Ok(GramFactor { factor: onehot(labels, num_classes)?, source: FactorSource::Onehot })
}

pub fn onehot(labels: &[u32], num_classes: usize) -> Result<Matrix> {
    let mut m = Matrix::zeros(labels.len(), num_classes);
    for (i, &l) in labels.iter().enumerate() {
        if l as usize >= num_classes {
            return Err(FateError::LabelOutOfRange { label: l, classes: num_classes });
        }
        m[(i, l as usize)] = 1.0;
    }
    Ok(m)
}

/// `H·M` with `H = I − (1/n)·1·1ᵀ`, computed by subtracting column means.
pub fn center(m: &Matrix) -> Matrix {
    let means = m.column_means();
    let mut out = m.clone();
    for i in 0..out.rows() {
        for (v, mu) in out.row_mut(i).iter_mut().zip(&means) {
            *v -= mu;
        }
    }
    out
}

/// Gram factor of `x` under `config`.
///
/// Gaussian-RFF returns the feature matrix itself; linear returns `x`;
/// delta-onehot reads the first column of `x` as integer labels.
pub fn gram_factor(x: &Matrix, config: &KernelConfig) -> Result<GramFactor> {
    config.validate()?;
    match config.kind {
        KernelKind::GaussianRff => {
            Ok(GramFactor { factor: rff_features(x, config)?, source: FactorSource::RffFeatures })
        }
        KernelKind::Linear => Ok(GramFactor { factor: x.clone(), source: FactorSource::Linear }),
        KernelKind::DeltaOnehot => {
            if x.cols() != 1 {
                return Err(FateError::DimensionMismatch { expected: 1, got: x.cols() });
            }
            let mut labels = Vec::with_capacity(x.rows());
            for &v in x.as_slice() {
                if v < 0.0 || v.fract() != 0.0 {
                    return Err(FateError::BadConfig(format!("label value {v} is not a class index")));
                }
                labels.push(v as u32);
            }
            let classes = labels.iter().max().map_or(0, |&m| m as usize + 1);
            onehot_factor(&labels, classes)
        }
    }
}
