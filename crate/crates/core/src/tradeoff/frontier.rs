use serde::{Deserialize, Serialize};

use crate::error::{FateError, Result};

use super::curve::TradeoffPoint;

pub const DEFAULT_DISTANCE_WEIGHT: f64 = 0.5;

/// Points not dominated by another point (accuracy ≥ and unfairness ≤, one
/// strictly), ordered by unfairness ascending.
pub fn pareto_front(points: &[TradeoffPoint]) -> Vec<TradeoffPoint> {
    let dominated = |p: &TradeoffPoint| {
        points.iter().any(|q| {
            q.accuracy >= p.accuracy
                && q.unfairness <= p.unfairness
                && (q.accuracy > p.accuracy || q.unfairness < p.unfairness)
        })
    };
    let mut front: Vec<TradeoffPoint> = points.iter().filter(|p| !dominated(p)).copied().collect();
    front.sort_by(|a, b| a.unfairness.total_cmp(&b.unfairness));
    front
}

/// Scales of the two axes in the distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Normalizers {
    pub max_f: f64,
    pub max_acc: f64,
}

impl Normalizers {
    /// `max_acc = 1`; `max_f` is the largest unfairness among the given
    /// points, or 1 when they are all zero.
    pub fn observed<'a>(points: impl IntoIterator<Item = &'a TradeoffPoint>) -> Self {
        let max_f = points.into_iter().map(|p| p.unfairness).fold(0.0, f64::max);
        Normalizers { max_f: if max_f > 0.0 { max_f } else { 1.0 }, max_acc: 1.0 }
    }
}

/// Weighted normalized Euclidean distance from `point` to the nearest curve
/// point.
pub fn dist_to_curve(point: &TradeoffPoint, curve: &[TradeoffPoint], w: f64, norm: Normalizers) -> Result<f64> {
    if curve.is_empty() {
        return Err(FateError::EmptyCurve);
    }
    if !(0.0..=1.0).contains(&w) {
        return Err(FateError::BadConfig(format!("distance weight must lie in [0, 1], got {w}")));
    }
    if !(norm.max_f > 0.0 && norm.max_acc > 0.0) {
        return Err(FateError::BadConfig("distance normalizers must be > 0".into()));
    }
    Ok(curve
        .iter()
        .map(|c| {
            let df = (c.unfairness - point.unfairness) / norm.max_f;
            let da = (c.accuracy - point.accuracy) / norm.max_acc;
            (w * df * df + (1.0 - w) * da * da).sqrt()
        })
        .fold(f64::INFINITY, f64::min))
}

/// Piecewise-linear accuracy as a function of unfairness along a Pareto
/// front.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveInterpolant {
    knots: Vec<(f64, f64)>,
}

impl CurveInterpolant {
    pub fn from_points(points: &[TradeoffPoint]) -> Result<Self> {
        if points.is_empty() {
            return Err(FateError::EmptyCurve);
        }
        let mut knots: Vec<(f64, f64)> = Vec::new();
        for p in pareto_front(points) {
            if knots.last().is_none_or(|&(f, _)| p.unfairness > f) {
                knots.push((p.unfairness, p.accuracy));
            }
        }
        Ok(CurveInterpolant { knots })
    }

    /// Accuracy at `unfairness`, and whether it was clamped to an endpoint.
    pub fn accuracy_at(&self, unfairness: f64) -> (f64, bool) {
        let first = self.knots[0];
        let last = *self.knots.last().expect("non-empty");
        if unfairness < first.0 {
            return (first.1, true);
        }
        if unfairness > last.0 {
            return (last.1, true);
        }
        let k = self.knots.partition_point(|&(f, _)| f < unfairness);
        let (f1, a1) = self.knots[k];
        if f1 == unfairness || k == 0 {
            return (a1, false);
        }
        let (f0, a0) = self.knots[k - 1];
        (a0 + (a1 - a0) * (unfairness - f0) / (f1 - f0), false)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Region {
    Impossible,
    PossibleWithExtraData,
    Possible,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionResult {
    pub region: Region,
    pub dst_accuracy: f64,
    pub lst_accuracy: f64,
    /// The point's unfairness lay outside a curve's range.
    pub extrapolated: bool,
}

pub fn classify_region(point: &TradeoffPoint, dst: &[TradeoffPoint], lst: &[TradeoffPoint]) -> Result<RegionResult> {
    let (dst_accuracy, dst_extra) = CurveInterpolant::from_points(dst)?.accuracy_at(point.unfairness);
    let (lst_accuracy, lst_extra) = CurveInterpolant::from_points(lst)?.accuracy_at(point.unfairness);
    let region = if point.accuracy > lst_accuracy {
        Region::Impossible
    } else if point.accuracy > dst_accuracy {
        Region::PossibleWithExtraData
    } else {
        Region::Possible
    };
    Ok(RegionResult { region, dst_accuracy, lst_accuracy, extrapolated: dst_extra || lst_extra })
}
