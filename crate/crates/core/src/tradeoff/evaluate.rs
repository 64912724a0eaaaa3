use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::dependence::FairnessNotion;
use crate::error::{FateError, Result};
use crate::linalg::Matrix;
use crate::metrics::{accuracy, unfairness, GroupAggregation, PredictionSet};
use crate::nn::{train_classifier, ClassifierConfig};

use super::curve::{PointSource, TradeoffPoint};
use super::frontier::{classify_region, dist_to_curve, Normalizers, Region};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub point: TradeoffPoint,
    pub dist_dst: f64,
    pub dist_lst: f64,
    pub region: Region,
    pub dst_accuracy_at_point: f64,
    pub lst_accuracy_at_point: f64,
    pub extrapolated: bool,
    pub weight: f64,
    pub normalizers: Normalizers,
}

/// Scores a representation against the two frontiers. `max_f` is taken over
/// the point and the raw points of both curves.
#[allow(clippy::too_many_arguments)]
pub fn evaluate_representation(
    z: &Matrix,
    dataset: &Dataset,
    notion: FairnessNotion,
    dst: &[TradeoffPoint],
    lst: &[TradeoffPoint],
    classifier: &ClassifierConfig,
    aggregation: GroupAggregation,
    weight: f64,
) -> Result<EvaluationReport> {
    if z.rows() != dataset.len() {
        return Err(FateError::RowCountMismatch { left: dataset.len(), right: z.rows() });
    }
    if dst.is_empty() || lst.is_empty() {
        return Err(FateError::EmptyCurve);
    }
    let model = train_classifier(z, &dataset.y, classifier)?;
    let predictions = PredictionSet::new(model.predict(z)?, dataset.y.clone(), dataset.s.clone())?;
    let point = TradeoffPoint {
        lambda: f64::NAN,
        seed: classifier.sgd.seed,
        accuracy: accuracy(&predictions)?,
        unfairness: unfairness(&predictions, notion, aggregation)?,
        notion,
        source: PointSource::External,
    };
    let normalizers = Normalizers::observed(std::iter::once(&point).chain(dst).chain(lst));
    let region = classify_region(&point, dst, lst)?;
    Ok(EvaluationReport {
        point,
        dist_dst: dist_to_curve(&point, dst, weight, normalizers)?,
        dist_lst: dist_to_curve(&point, lst, weight, normalizers)?,
        region: region.region,
        dst_accuracy_at_point: region.dst_accuracy,
        lst_accuracy_at_point: region.lst_accuracy,
        extrapolated: region.extrapolated,
        weight,
        normalizers,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::onehot;
    use crate::nn::ClassifierConfig;
    use crate::tradeoff::frontier::DEFAULT_DISTANCE_WEIGHT;
    use rand::{Rng as _, SeedableRng};

    fn curve_point(unfairness: f64, accuracy: f64, source: PointSource) -> TradeoffPoint {
        TradeoffPoint { lambda: 0.0, seed: 0, accuracy, unfairness, notion: FairnessNotion::Dp, source }
    }

    fn dataset() -> Dataset {
        let mut r = crate::rng::Rng::seed_from_u64(3);
        let y: Vec<u32> = (0..400).map(|_| r.random_range(0..2)).collect();
        let s: Vec<u32> = y.iter().map(|&v| if r.random_bool(0.8) { v } else { 1 - v }).collect();
        Dataset::new(Matrix::zeros(400, 1), y, s).unwrap()
    }

    #[test]
    fn ideal_and_noise_representations() {
        let d = dataset();
        let dst = [curve_point(0.0, 0.55, PointSource::Dst), curve_point(0.6, 0.85, PointSource::Dst)];
        let lst = [curve_point(0.0, 0.8, PointSource::Lst), curve_point(0.6, 1.0, PointSource::Lst)];
        let config = ClassifierConfig::logistic();

        let ideal = onehot(&d.y, 2).unwrap();
        let report = evaluate_representation(
            &ideal,
            &d,
            FairnessNotion::Dp,
            &dst,
            &lst,
            &config,
            GroupAggregation::Max,
            DEFAULT_DISTANCE_WEIGHT,
        )
        .unwrap();
        assert!(report.point.accuracy > 0.999);
        let direct = classify_region(&report.point, &dst, &lst).unwrap();
        assert_eq!(report.region, direct.region);
        assert!(report.dist_lst <= report.dist_dst);

        let mut r = crate::rng::Rng::seed_from_u64(5);
        let noise = Matrix::from_fn(400, 3, |_, _| r.random_range(-1.0..1.0));
        let report = evaluate_representation(
            &noise,
            &d,
            FairnessNotion::Dp,
            &dst,
            &lst,
            &config,
            GroupAggregation::Max,
            DEFAULT_DISTANCE_WEIGHT,
        )
        .unwrap();
        assert!(report.point.accuracy < 0.65, "{report:?}");
        assert!(report.point.unfairness < 0.2);
        assert_eq!(report.region, Region::Possible);
        let again = evaluate_representation(
            &noise,
            &d,
            FairnessNotion::Dp,
            &dst,
            &lst,
            &config,
            GroupAggregation::Max,
            DEFAULT_DISTANCE_WEIGHT,
        )
        .unwrap();
        assert_eq!(format!("{report:?}"), format!("{again:?}"));
    }

    #[test]
    fn empty_curves_are_rejected() {
        let d = dataset();
        let z = Matrix::zeros(400, 1);
        let lst = [curve_point(0.0, 0.8, PointSource::Lst)];
        assert!(matches!(
            evaluate_representation(
                &z,
                &d,
                FairnessNotion::Dp,
                &[],
                &lst,
                &ClassifierConfig::logistic(),
                GroupAggregation::Max,
                0.5
            ),
            Err(FateError::EmptyCurve)
        ));
    }
}
