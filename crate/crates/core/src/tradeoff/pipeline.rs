use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::dependence::FairnessNotion;
use crate::encoder::{solve_encoder_with_basis, EncoderConfig, EncoderProblem, FairEncoder};
use crate::error::{FateError, Result};
use crate::kernels::{FeatureMap, GramFactor, KernelConfig};
use crate::linalg::Matrix;
use crate::metrics::{accuracy, unfairness, GroupAggregation, PredictionSet};
use crate::nn::{
    train_classifier, train_feature_extractor, Activation, Classifier, ClassifierConfig, Mlp, ObjectiveSpec,
    OutputNorm, SgdConfig,
};
use crate::rng;

use super::curve::{PointSource, TradeoffPoint};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    #[serde(default)]
    pub kernel: KernelConfig,
    #[serde(default)]
    pub encoder: EncoderConfig,
    /// Feature-extractor widths after the input layer.
    #[serde(default = "default_widths")]
    pub extractor_widths: Vec<usize>,
    /// Feature-extractor SGD; `epochs` is the total budget spread over the
    /// alternation rounds.
    #[serde(default)]
    pub sgd: SgdConfig,
    #[serde(default = "default_rounds")]
    pub rounds: usize,
    #[serde(default)]
    pub classifier: ClassifierConfig,
    #[serde(default)]
    pub aggregation: GroupAggregation,
    /// Label-space pipelines also feed `X` to the network.
    #[serde(default)]
    pub lst_include_x: bool,
    /// Fraction of rows held out for evaluation; `None` trains and evaluates
    /// on all rows.
    #[serde(default)]
    pub holdout: Option<f64>,
}

fn default_widths() -> Vec<usize> {
    vec![64, 32]
}

fn default_rounds() -> usize {
    20
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            kernel: KernelConfig::default(),
            encoder: EncoderConfig::default(),
            extractor_widths: default_widths(),
            sgd: SgdConfig::default(),
            rounds: default_rounds(),
            classifier: ClassifierConfig::default(),
            aggregation: GroupAggregation::Max,
            lst_include_x: false,
            holdout: None,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.kernel.validate()?;
        self.sgd.validate()?;
        if self.extractor_widths.is_empty() || self.extractor_widths.contains(&0) {
            return Err(FateError::BadConfig(format!("invalid extractor widths {:?}", self.extractor_widths)));
        }
        if let Some(h) = self.holdout {
            if !(h > 0.0 && h < 1.0) {
                return Err(FateError::BadConfig(format!("holdout fraction must lie in (0, 1), got {h}")));
            }
        }
        Ok(())
    }

    fn epochs_per_round(&self) -> usize {
        (self.sgd.epochs / self.rounds.max(1)).max(1)
    }
}

/// Everything a pipeline run produced.
#[derive(Debug, Clone)]
pub struct PipelineOutcome {
    pub point: TradeoffPoint,
    pub extractor: Mlp,
    pub encoder: FairEncoder,
    pub classifier: Classifier,
    /// Representation of the evaluation rows.
    pub z: Matrix,
    /// Per-round trace of `−J` from the feature-extractor SGD.
    pub loss_trace: Vec<f64>,
}

fn split_rows(n: usize, holdout: Option<f64>, seed: u64) -> (Vec<usize>, Vec<usize>) {
    match holdout {
        None => ((0..n).collect(), (0..n).collect()),
        Some(frac) => {
            let mut rows: Vec<usize> = (0..n).collect();
            rows.shuffle(&mut rng::stream(seed, &[rng::TAG_BATCHES, u64::MAX]));
            let test = ((n as f64 * frac).round() as usize).clamp(1, n - 1);
            let mut eval = rows.split_off(n - test);
            rows.sort_unstable();
            eval.sort_unstable();
            (rows, eval)
        }
    }
}

/// Alternates closed-form encoder solves with feature-extractor SGD on
/// `input`, then trains the downstream classifier on the representation.
#[allow(clippy::too_many_arguments)]
pub fn run_pipeline(
    input: &Matrix,
    dataset: &Dataset,
    lambda: f64,
    notion: FairnessNotion,
    config: &PipelineConfig,
    seed: u64,
    source: PointSource,
) -> Result<PipelineOutcome> {
    config.validate()?;
    if input.rows() != dataset.len() {
        return Err(FateError::RowCountMismatch { left: dataset.len(), right: input.rows() });
    }
    let (train_rows, eval_rows) = split_rows(dataset.len(), config.holdout, seed);
    let train = dataset.select_rows(&train_rows);
    let x_train = input.select_rows(&train_rows);

    let mut widths = vec![input.cols()];
    widths.extend_from_slice(&config.extractor_widths);
    let mut net = Mlp::new(
        &widths,
        Activation::Relu,
        false,
        OutputNorm::UnitNorm,
        &mut rng::stream(seed, &[rng::TAG_FEATURE_NET]),
    )?;
    let kernel = KernelConfig { seed, ..config.kernel.clone() };
    let basis = FeatureMap::fit(&net.forward(&x_train)?, &kernel)?;

    let spec = ObjectiveSpec {
        lambda,
        notion,
        num_target_classes: dataset.num_target_classes,
        num_sensitive_classes: dataset.num_sensitive_classes,
    };
    let solve = |net: &Mlp| -> Result<FairEncoder> {
        let factor = GramFactor { factor: basis.apply(&net.forward(&x_train)?)?, source: basis.source() };
        let problem = EncoderProblem::new(
            lambda,
            &config.encoder,
            notion,
            &factor,
            &train.y,
            train.num_target_classes,
            &train.s,
            train.num_sensitive_classes,
        );
        solve_encoder_with_basis(&problem, Some(basis.clone()))
    };

    let mut loss_trace = Vec::new();
    for round in 0..config.rounds {
        let encoder = solve(&net)?;
        let sgd = SgdConfig {
            epochs: config.epochs_per_round(),
            seed: rng::derive(seed, &[rng::TAG_BATCHES, round as u64]),
            ..config.sgd.clone()
        };
        let trace = train_feature_extractor(&mut net, &x_train, &train.y, &train.s, &encoder, &basis, &spec, &sgd)?;
        loss_trace.push(*trace.last().expect("at least one epoch"));
    }
    let encoder = solve(&net)?;

    let z_train = encoder.encode_features(&basis.apply(&net.forward(&x_train)?)?)?;
    let classifier_config = config.classifier.clone().with_seed(rng::derive(seed, &[rng::TAG_CLASSIFIER]));
    let classifier = train_classifier(&z_train, &train.y, &classifier_config)?;

    let eval = dataset.select_rows(&eval_rows);
    let z = if config.holdout.is_some() {
        encoder.encode_features(&basis.apply(&net.forward(&input.select_rows(&eval_rows))?)?)?
    } else {
        z_train
    };
    let predictions = PredictionSet::new(classifier.predict(&z)?, eval.y.clone(), eval.s.clone())?;
    let point = TradeoffPoint {
        lambda,
        seed,
        accuracy: accuracy(&predictions)?,
        unfairness: unfairness(&predictions, notion, config.aggregation)?,
        notion,
        source,
    };
    Ok(PipelineOutcome { point, extractor: net, encoder, classifier, z, loss_trace })
}

/// One point of the data-space trade-off.
pub fn estimate_dst_point(
    dataset: &Dataset,
    lambda: f64,
    notion: FairnessNotion,
    config: &PipelineConfig,
    seed: u64,
) -> Result<TradeoffPoint> {
    Ok(run_pipeline(&dataset.x, dataset, lambda, notion, config, seed, PointSource::Dst)?.point)
}

/// One point of the label-space trade-off: the network sees one-hot `Y` and
/// `S` (and `X` when `include_x`).
pub fn estimate_lst_point(
    dataset: &Dataset,
    lambda: f64,
    notion: FairnessNotion,
    config: &PipelineConfig,
    seed: u64,
    include_x: bool,
) -> Result<TradeoffPoint> {
    let input = dataset.label_space_input(include_x)?;
    Ok(run_pipeline(&input, dataset, lambda, notion, config, seed, PointSource::Lst)?.point)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{generate_synthetic, EntanglementMode, SyntheticSpec};
    use crate::kernels::Bandwidth;

    fn quick_config() -> PipelineConfig {
        PipelineConfig {
            kernel: KernelConfig::gaussian(64, Bandwidth::MedianHeuristic, 0),
            rounds: 2,
            sgd: SgdConfig { epochs: 2, batch_size: 64, ..SgdConfig::default() },
            extractor_widths: vec![16, 8],
            ..PipelineConfig::default()
        }
    }

    fn data(rho: f64) -> Dataset {
        generate_synthetic(&SyntheticSpec {
            n: 400,
            rho,
            noise: 0.3,
            mode: EntanglementMode::Separable,
            ..SyntheticSpec::default()
        })
        .unwrap()
    }

    #[test]
    fn unconstrained_point_is_accurate_and_deterministic() {
        let d = data(0.5);
        let a = estimate_dst_point(&d, 0.0, FairnessNotion::Dp, &quick_config(), 3).unwrap();
        let b = estimate_dst_point(&d, 0.0, FairnessNotion::Dp, &quick_config(), 3).unwrap();
        assert_eq!(a, b);
        assert!(a.accuracy >= 0.95, "{a:?}");
        assert_eq!(a.source, PointSource::Dst);
    }

    #[test]
    fn label_space_point_is_perfect_at_zero_lambda() {
        let d = data(0.8);
        for notion in [FairnessNotion::Dp, FairnessNotion::EO, FairnessNotion::Eoo] {
            let p = estimate_lst_point(&d, 0.0, notion, &quick_config(), 1, false).unwrap();
            assert!(p.accuracy >= 0.99, "{notion}: {p:?}");
        }
    }

    #[test]
    fn holdout_and_validation() {
        let d = data(0.5);
        let config = PipelineConfig { holdout: Some(0.25), ..quick_config() };
        let out = run_pipeline(&d.x, &d, 0.0, FairnessNotion::Dp, &config, 0, PointSource::Dst).unwrap();
        assert_eq!(out.z.rows(), 100);
        assert_eq!(out.loss_trace.len(), 2);
        let bad = PipelineConfig { holdout: Some(1.5), ..quick_config() };
        assert!(estimate_dst_point(&d, 0.0, FairnessNotion::Dp, &bad, 0).is_err());
        assert!(estimate_dst_point(&d, 1.0, FairnessNotion::Dp, &quick_config(), 0).is_err());
    }

    #[test]
    fn split_is_a_partition() {
        let (train, eval) = split_rows(10, Some(0.3), 4);
        assert_eq!((train.len(), eval.len()), (7, 3));
        let mut all: Vec<usize> = train.iter().chain(&eval).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..10).collect::<Vec<_>>());
    }
}
