use rand_distr::{Distribution, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{FateError, Result};
use crate::linalg::Matrix;
use crate::rng::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Tanh,
    Identity,
}

impl Activation {
    fn apply(self, v: f64) -> f64 {
        match self {
            Activation::Relu => v.max(0.0),
            Activation::Tanh => v.tanh(),
            Activation::Identity => v,
        }
    }

    /// Derivative expressed through the pre-activation `v` and output `a`.
    fn derivative(self, v: f64, a: f64) -> f64 {
        match self {
            Activation::Relu => {
                if v > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - a * a,
            Activation::Identity => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputNorm {
    UnitNorm,
    #[default]
    None,
}

/// Rows with a smaller norm are left unscaled by unit normalization.
const NORM_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    /// out×in
    pub weights: Matrix,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub layers: Vec<Layer>,
    pub activation: Activation,
    /// Whether the last layer is followed by `activation`.
    pub output_activation: bool,
    pub normalization: OutputNorm,
}

/// Intermediate values of a forward pass, consumed by [`Mlp::backward`].
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// Input to each layer; `inputs[0]` is the network input.
    inputs: Vec<Matrix>,
    pre: Vec<Matrix>,
    /// Last-layer activations before normalization.
    raw: Matrix,
    pub output: Matrix,
}

impl Mlp {
    /// Glorot-uniform weights, zero biases.
    pub fn new(
        widths: &[usize],
        activation: Activation,
        output_activation: bool,
        normalization: OutputNorm,
        rng: &mut Rng,
    ) -> Result<Self> {
        if widths.len() < 2 || widths.contains(&0) {
            return Err(FateError::BadConfig(format!("invalid layer widths {widths:?}")));
        }
        let layers = widths
            .windows(2)
            .map(|w| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
                let dist = Uniform::new_inclusive(-limit, limit).expect("valid range");
                Layer { weights: Matrix::from_fn(fan_out, fan_in, |_, _| dist.sample(rng)), bias: vec![0.0; fan_out] }
            })
            .collect();
        Ok(Mlp { layers, activation, output_activation, normalization })
    }

    /// Default feature extractor: `d → 64 → 32`, relu hidden layer, linear
    /// output, unit-norm rows.
    pub fn feature_extractor(input_dim: usize, rng: &mut Rng) -> Result<Self> {
        Mlp::new(&[input_dim, 64, 32], Activation::Relu, false, OutputNorm::UnitNorm, rng)
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].weights.cols()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().expect("at least one layer").weights.rows()
    }

    pub fn widths(&self) -> Vec<usize> {
        std::iter::once(self.input_dim()).chain(self.layers.iter().map(|l| l.weights.rows())).collect()
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(|l| l.weights.as_slice().len() + l.bias.len()).sum()
    }

    /// Parameters flattened layer by layer, weights (row-major) then bias.
    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_params());
        for l in &self.layers {
            out.extend_from_slice(l.weights.as_slice());
            out.extend_from_slice(&l.bias);
        }
        out
    }

    pub fn set_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.num_params() {
            return Err(FateError::DimensionMismatch { expected: self.num_params(), got: params.len() });
        }
        let mut offset = 0;
        for l in &mut self.layers {
            let w = l.weights.as_mut_slice();
            w.copy_from_slice(&params[offset..offset + w.len()]);
            offset += w.len();
            let b = l.bias.len();
            l.bias.copy_from_slice(&params[offset..offset + b]);
            offset += b;
        }
        Ok(())
    }

    fn is_activated(&self, layer: usize) -> bool {
        layer + 1 < self.layers.len() || self.output_activation
    }

    pub fn forward(&self, x: &Matrix) -> Result<Matrix> {
        Ok(self.forward_cached(x)?.output)
    }

    pub fn forward_cached(&self, x: &Matrix) -> Result<ForwardCache> {
        if x.cols() != self.input_dim() {
            return Err(FateError::ShapeMismatch(format!(
                "network expects {} input columns, got {}",
                self.input_dim(),
                x.cols()
            )));
        }
        let mut inputs = vec![x.clone()];
        let mut pre = Vec::with_capacity(self.layers.len());
        for (k, layer) in self.layers.iter().enumerate() {
            let mut p = inputs[k].matmul_t(&layer.weights)?;
            for i in 0..p.rows() {
                for (v, b) in p.row_mut(i).iter_mut().zip(&layer.bias) {
                    *v += b;
                }
            }
            let act = if self.is_activated(k) { self.activation } else { Activation::Identity };
            let mut a = p.clone();
            a.as_mut_slice().iter_mut().for_each(|v| *v = act.apply(*v));
            pre.push(p);
            inputs.push(a);
        }
        let raw = inputs.pop().expect("non-empty");
        let output = match self.normalization {
            OutputNorm::None => raw.clone(),
            OutputNorm::UnitNorm => {
                let mut out = raw.clone();
                for i in 0..out.rows() {
                    let row = out.row_mut(i);
                    let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
                    if norm > NORM_FLOOR {
                        row.iter_mut().for_each(|v| *v /= norm);
                    }
                }
                out
            }
        };
        Ok(ForwardCache { inputs, pre, raw, output })
    }

    /// Returns the flattened parameter gradient (ordered as [`Mlp::params`])
    /// and the gradient with respect to the input.
    pub fn backward(&self, cache: &ForwardCache, grad_output: &Matrix) -> Result<(Vec<f64>, Matrix)> {
        if grad_output.shape() != cache.output.shape() {
            return Err(FateError::ShapeMismatch(format!(
                "output gradient {:?} vs output {:?}",
                grad_output.shape(),
                cache.output.shape()
            )));
        }
        let mut g = grad_output.clone();
        if self.normalization == OutputNorm::UnitNorm {
            for i in 0..g.rows() {
                let raw = cache.raw.row(i);
                let norm = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
                if norm > NORM_FLOOR {
                    let y = cache.output.row(i);
                    let gy = g.row_mut(i);
                    let proj: f64 = y.iter().zip(gy.iter()).map(|(a, b)| a * b).sum();
                    for (gv, yv) in gy.iter_mut().zip(y) {
                        *gv = (*gv - yv * proj) / norm;
                    }
                }
            }
        }
        let mut per_layer: Vec<(Vec<f64>, Vec<f64>)> = Vec::with_capacity(self.layers.len());
        for k in (0..self.layers.len()).rev() {
            let act = if self.is_activated(k) { self.activation } else { Activation::Identity };
            let output = if k + 1 < self.layers.len() { &cache.inputs[k + 1] } else { &cache.raw };
            for ((gv, &p), &a) in g.as_mut_slice().iter_mut().zip(cache.pre[k].as_slice()).zip(output.as_slice()) {
                *gv *= act.derivative(p, a);
            }
            let gw = g.t_matmul(&cache.inputs[k])?;
            let gb = (0..g.cols()).map(|j| (0..g.rows()).map(|i| g[(i, j)]).sum()).collect();
            per_layer.push((gw.into_vec(), gb));
            g = g.matmul(&self.layers[k].weights)?;
        }
        let mut flat = Vec::with_capacity(self.num_params());
        for (gw, gb) in per_layer.into_iter().rev() {
            flat.extend(gw);
            flat.extend(gb);
        }
        Ok((flat, g))
    }
}

#[cfg(test)]
pub(crate) fn uniform_matrix(rows: usize, cols: usize, limit: f64, rng: &mut Rng) -> Matrix {
    use rand::Rng as _;
    Matrix::from_fn(rows, cols, |_, _| rng.random_range(-limit..limit))
}
