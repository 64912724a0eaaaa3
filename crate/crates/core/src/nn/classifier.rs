use serde::{Deserialize, Serialize};

use crate::error::{FateError, Result};
use crate::linalg::Matrix;
use crate::rng;

use super::mlp::{Activation, Mlp, OutputNorm};
use super::sgd::{train_loop, Schedule, SgdConfig, StepOutput};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ClassifierKind {
    #[serde(rename = "logistic")]
    Logistic,
    #[default]
    #[serde(rename = "mlp-2layer")]
    Mlp2Layer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierConfig {
    #[serde(default)]
    pub kind: ClassifierKind,
    #[serde(default = "default_hidden")]
    pub hidden_width: usize,
    /// Hidden layers of the MLP kind; 1 gives the two-layer network.
    #[serde(default = "default_hidden_layers")]
    pub hidden_layers: usize,
    #[serde(default = "default_sgd")]
    pub sgd: SgdConfig,
}

fn default_hidden() -> usize {
    64
}

fn default_hidden_layers() -> usize {
    1
}

fn default_sgd() -> SgdConfig {
    SgdConfig { learning_rate: 0.05, epochs: 30, batch_size: 128, schedule: Schedule::Cosine, momentum: 0.9, seed: 0 }
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig {
            kind: ClassifierKind::Mlp2Layer,
            hidden_width: default_hidden(),
            hidden_layers: default_hidden_layers(),
            sgd: default_sgd(),
        }
    }
}

impl ClassifierConfig {
    pub fn logistic() -> Self {
        ClassifierConfig { kind: ClassifierKind::Logistic, ..ClassifierConfig::default() }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.sgd.seed = seed;
        self
    }
}

/// Softmax classifier over standardized inputs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Classifier {
    pub kind: ClassifierKind,
    pub num_classes: usize,
    mean: Vec<f64>,
    scale: Vec<f64>,
    net: Mlp,
}

impl Classifier {
    pub fn input_dim(&self) -> usize {
        self.mean.len()
    }

    fn standardize(&self, z: &Matrix) -> Result<Matrix> {
        if z.cols() != self.input_dim() {
            return Err(FateError::DimensionMismatch { expected: self.input_dim(), got: z.cols() });
        }
        let mut out = z.clone();
        for i in 0..out.rows() {
            for ((v, m), s) in out.row_mut(i).iter_mut().zip(&self.mean).zip(&self.scale) {
                *v = (*v - m) / s;
            }
        }
        Ok(out)
    }

    /// Rows of class probabilities.
    pub fn predict_proba(&self, z: &Matrix) -> Result<Matrix> {
        let mut logits = self.net.forward(&self.standardize(z)?)?;
        softmax_rows(&mut logits);
        Ok(logits)
    }

    pub fn predict(&self, z: &Matrix) -> Result<Vec<u32>> {
        let logits = self.net.forward(&self.standardize(z)?)?;
        Ok((0..logits.rows())
            .map(|i| {
                let row = logits.row(i);
                let mut best = 0;
                for (k, v) in row.iter().enumerate() {
                    if *v > row[best] {
                        best = k;
                    }
                }
                best as u32
            })
            .collect())
    }
}

fn softmax_rows(m: &mut Matrix) {
    for i in 0..m.rows() {
        let row = m.row_mut(i);
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        row.iter_mut().for_each(|v| *v /= sum);
    }
}

/// Trains by minibatch SGD on the mean softmax cross-entropy.
pub fn train_classifier(z: &Matrix, y: &[u32], config: &ClassifierConfig) -> Result<Classifier> {
    let n = z.rows();
    if y.len() != n {
        return Err(FateError::RowCountMismatch { left: n, right: y.len() });
    }
    if n == 0 {
        return Err(FateError::EmptyInput);
    }
    let first = y[0];
    if y.iter().all(|&v| v == first) {
        return Err(FateError::SingleClass);
    }
    let num_classes = *y.iter().max().expect("non-empty") as usize + 1;

    let mean = z.column_means();
    let scale: Vec<f64> = (0..z.cols())
        .map(|j| {
            let var = (0..n).map(|i| (z[(i, j)] - mean[j]).powi(2)).sum::<f64>() / n as f64;
            if var.sqrt() > 1e-12 {
                var.sqrt()
            } else {
                1.0
            }
        })
        .collect();

    let mut widths = vec![z.cols()];
    if config.kind == ClassifierKind::Mlp2Layer {
        widths.extend(std::iter::repeat_n(config.hidden_width, config.hidden_layers));
    }
    widths.push(num_classes);
    let mut init = rng::stream(config.sgd.seed, &[rng::TAG_CLASSIFIER]);
    let net = Mlp::new(&widths, Activation::Relu, false, OutputNorm::None, &mut init)?;
    let mut model = Classifier { kind: config.kind, num_classes, mean, scale, net };

    let x = model.standardize(z)?;
    let mut params = model.net.params();
    let mut scratch = model.net.clone();
    let sgd = SgdConfig { seed: rng::derive(config.sgd.seed, &[rng::TAG_CLASSIFIER]), ..config.sgd.clone() };
    train_loop(&mut params, n, &sgd, |p, rows| {
        scratch.set_params(p)?;
        let cache = scratch.forward_cached(&x.select_rows(rows))?;
        let mut probs = cache.output.clone();
        softmax_rows(&mut probs);
        let b = rows.len() as f64;
        let mut loss = 0.0;
        for (k, &i) in rows.iter().enumerate() {
            let label = y[i] as usize;
            loss -= probs[(k, label)].max(1e-300).ln();
            probs[(k, label)] -= 1.0;
        }
        probs.scale_in_place(1.0 / b);
        let (grad, _) = scratch.backward(&cache, &probs)?;
        Ok(StepOutput { loss: loss / b, grad })
    })?;
    model.net.set_params(&params)?;
    Ok(model)
}
