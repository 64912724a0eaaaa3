use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{FateError, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Schedule {
    #[default]
    Cosine,
    Constant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SgdConfig {
    #[serde(default = "default_lr")]
    pub learning_rate: f64,
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    #[serde(default = "default_batch")]
    pub batch_size: usize,
    #[serde(default)]
    pub schedule: Schedule,
    #[serde(default)]
    pub momentum: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_lr() -> f64 {
    1e-2
}

fn default_epochs() -> usize {
    50
}

fn default_batch() -> usize {
    256
}

impl Default for SgdConfig {
    fn default() -> Self {
        SgdConfig {
            learning_rate: default_lr(),
            epochs: default_epochs(),
            batch_size: default_batch(),
            schedule: Schedule::Cosine,
            momentum: 0.0,
            seed: 0,
        }
    }
}

impl SgdConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(FateError::BadConfig(format!("learning rate must be > 0, got {}", self.learning_rate)));
        }
        if self.batch_size == 0 {
            return Err(FateError::BadConfig("batch size must be >= 1".into()));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(FateError::BadConfig(format!("momentum must lie in [0, 1), got {}", self.momentum)));
        }
        Ok(())
    }
}

/// `η(t) = η₀·(1 + cos(π·t/T))/2` for the cosine schedule.
pub fn learning_rate_at(config: &SgdConfig, step: usize, total_steps: usize) -> f64 {
    match config.schedule {
        Schedule::Constant => config.learning_rate,
        Schedule::Cosine => {
            let t = step as f64 / total_steps.max(1) as f64;
            config.learning_rate * 0.5 * (1.0 + (std::f64::consts::PI * t).cos())
        }
    }
}

/// Loss and gradient of one minibatch.
#[derive(Debug, Clone)]
pub struct StepOutput {
    pub loss: f64,
    pub grad: Vec<f64>,
}

/// Minimizes the loss returned by `step` over shuffled minibatches of
/// `0..n`. Returns the mean batch loss of each epoch. Batches for which
/// `step` reports [`FateError::DegenerateBatch`] are skipped.
pub fn train_loop<F>(params: &mut [f64], n: usize, config: &SgdConfig, mut step: F) -> Result<Vec<f64>>
where
    F: FnMut(&[f64], &[usize]) -> Result<StepOutput>,
{
    config.validate()?;
    if n == 0 {
        return Err(FateError::EmptyInput);
    }
    let batches_per_epoch = n.div_ceil(config.batch_size);
    let total = config.epochs * batches_per_epoch;
    let mut velocity = vec![0.0; params.len()];
    let mut order: Vec<usize> = (0..n).collect();
    let mut trace = Vec::with_capacity(config.epochs);
    let mut t = 0;
    for epoch in 0..config.epochs {
        let mut shuffle = rng::stream(config.seed, &[rng::TAG_BATCHES, epoch as u64]);
        order.shuffle(&mut shuffle);
        let (mut sum, mut used) = (0.0, 0usize);
        for batch in order.chunks(config.batch_size) {
            let out = match step(params, batch) {
                Err(FateError::DegenerateBatch(why)) => {
                    log::debug!("skipping batch: {why}");
                    continue;
                }
                other => other?,
            };
            if out.grad.len() != params.len() {
                return Err(FateError::DimensionMismatch { expected: params.len(), got: out.grad.len() });
            }
            if !out.loss.is_finite() || out.grad.iter().any(|g| !g.is_finite()) {
                trace.push(out.loss);
                return Err(FateError::DivergenceDetected { epoch, loss: out.loss, trace });
            }
            sum += out.loss;
            used += 1;
            let lr = learning_rate_at(config, t, total);
            for ((p, v), g) in params.iter_mut().zip(&mut velocity).zip(&out.grad) {
                *v = config.momentum * *v + g;
                *p -= lr * *v;
            }
            t += 1;
        }
        if used == 0 {
            return Err(FateError::DegenerateBatch(format!("every batch of epoch {epoch} was degenerate")));
        }
        trace.push(sum / used as f64);
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cosine_endpoints() {
        let c = SgdConfig { learning_rate: 0.3, ..SgdConfig::default() };
        assert_eq!(learning_rate_at(&c, 0, 100), 0.3);
        assert!(learning_rate_at(&c, 100, 100).abs() < 1e-15);
        assert!((learning_rate_at(&c, 50, 100) - 0.15).abs() < 1e-15);
        assert!(learning_rate_at(&c, 99, 100) > 0.0);
        let k = SgdConfig { schedule: Schedule::Constant, ..c };
        assert_eq!(learning_rate_at(&k, 70, 100), 0.3);
    }

    #[test]
    fn zero_gradient_is_a_fixed_point() {
        let mut p = vec![1.0, -2.0, 3.5];
        let c = SgdConfig { epochs: 5, batch_size: 2, ..SgdConfig::default() };
        train_loop(&mut p, 7, &c, |params, _| Ok(StepOutput { loss: 0.0, grad: vec![0.0; params.len()] })).unwrap();
        assert_eq!(p, vec![1.0, -2.0, 3.5]);
    }

    #[test]
    fn quadratic_converges_to_minimum() {
        let target = [3.0, -1.0];
        let mut p = vec![0.0, 0.0];
        let c = SgdConfig {
            learning_rate: 0.1,
            epochs: 200,
            batch_size: 1,
            schedule: Schedule::Constant,
            ..SgdConfig::default()
        };
        let trace = train_loop(&mut p, 1, &c, |params, _| {
            let grad: Vec<f64> = params.iter().zip(&target).map(|(a, b)| 2.0 * (a - b)).collect();
            let loss = params.iter().zip(&target).map(|(a, b)| (a - b) * (a - b)).sum();
            Ok(StepOutput { loss, grad })
        })
        .unwrap();
        assert_eq!(trace.len(), 200);
        assert!((p[0] - 3.0).abs() < 1e-3 && (p[1] + 1.0).abs() < 1e-3);
    }

    #[test]
    fn degenerate_batches_are_skipped() {
        let config = SgdConfig { epochs: 2, batch_size: 3, momentum: 0.0, ..SgdConfig::default() };
        let mut params = vec![1.0];
        let mut calls = 0;
        let trace = train_loop(&mut params, 7, &config, |p, rows| {
            calls += 1;
            if rows.len() < 2 {
                return Err(FateError::DegenerateBatch("one row".into()));
            }
            Ok(StepOutput { loss: p[0] * p[0], grad: vec![2.0 * p[0]] })
        })
        .unwrap();
        assert_eq!((calls, trace.len()), (6, 2));
        assert!(params[0] < 1.0);

        let all_bad = train_loop(&mut params, 1, &config, |_, _| Err(FateError::DegenerateBatch("one row".into())));
        assert!(matches!(all_bad, Err(FateError::DegenerateBatch(_))));
    }

    #[test]
    fn divergence_and_determinism() {
        let mut p = vec![1.0];
        let c = SgdConfig { epochs: 3, batch_size: 1, ..SgdConfig::default() };
        let err = train_loop(&mut p, 2, &c, |_, _| Ok(StepOutput { loss: f64::NAN, grad: vec![0.0] }));
        assert!(matches!(err, Err(FateError::DivergenceDetected { epoch: 0, .. })));

        let run = || {
            let mut seen = Vec::new();
            let mut q = vec![0.0];
            train_loop(&mut q, 10, &SgdConfig { epochs: 2, batch_size: 3, seed: 4, ..SgdConfig::default() }, |_, b| {
                seen.extend_from_slice(b);
                Ok(StepOutput { loss: 1.0, grad: vec![b[0] as f64] })
            })
            .unwrap();
            (seen, q)
        };
        let (a, qa) = run();
        let (b, qb) = run();
        assert_eq!(a, b);
        assert_eq!(qa, qb);
        let mut first: Vec<usize> = a[..10].to_vec();
        first.sort_unstable();
        assert_eq!(first, (0..10).collect::<Vec<_>>());
    }
}
