use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dependence::FairnessNotion;

pub const DEFAULT_BIN_WIDTH: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PointSource {
    Dst,
    Lst,
    External,
}

impl fmt::Display for PointSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PointSource::Dst => "dst",
            PointSource::Lst => "lst",
            PointSource::External => "external",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TradeoffPoint {
    /// NaN for points that did not come from a sweep; JSON stores it as null.
    #[serde(deserialize_with = "nan_from_null")]
    pub lambda: f64,
    pub seed: u64,
    pub accuracy: f64,
    pub unfairness: f64,
    pub notion: FairnessNotion,
    pub source: PointSource,
}

fn nan_from_null<'de, D: serde::Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

/// Accuracy statistics of the points whose unfairness falls in
/// `[index·width, (index+1)·width)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveBin {
    pub index: i64,
    pub center: f64,
    pub unfairness_mean: f64,
    pub accuracy_mean: f64,
    /// Population variance.
    pub accuracy_var: f64,
    pub count: usize,
}

/// A sweep job that produced no point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointFailure {
    pub lambda: f64,
    pub seed: u64,
    pub kind: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeoffCurve {
    pub source: PointSource,
    pub notion: FairnessNotion,
    pub bin_width: f64,
    pub points: Vec<TradeoffPoint>,
    pub bins: Vec<CurveBin>,
    #[serde(default)]
    pub failures: Vec<PointFailure>,
}

impl TradeoffCurve {
    pub fn from_points(
        source: PointSource,
        notion: FairnessNotion,
        bin_width: f64,
        points: Vec<TradeoffPoint>,
        failures: Vec<PointFailure>,
    ) -> Self {
        let bins = bin_points(&points, bin_width);
        TradeoffCurve { source, notion, bin_width, points, bins, failures }
    }

    pub fn is_partial(&self) -> bool {
        !self.failures.is_empty()
    }

    pub fn bin(&self, index: i64) -> Option<&CurveBin> {
        self.bins.iter().find(|b| b.index == index)
    }
}

pub fn bin_index(unfairness: f64, width: f64) -> i64 {
    (unfairness / width).floor() as i64
}

/// Groups points by unfairness bin, sorted by bin index.
pub fn bin_points(points: &[TradeoffPoint], width: f64) -> Vec<CurveBin> {
    let mut groups: BTreeMap<i64, Vec<&TradeoffPoint>> = BTreeMap::new();
    for p in points {
        groups.entry(bin_index(p.unfairness, width)).or_default().push(p);
    }
    groups
        .into_iter()
        .map(|(index, members)| {
            let count = members.len();
            let k = count as f64;
            let accuracy_mean = members.iter().map(|p| p.accuracy).sum::<f64>() / k;
            let accuracy_var = members.iter().map(|p| (p.accuracy - accuracy_mean).powi(2)).sum::<f64>() / k;
            CurveBin {
                index,
                center: (index as f64 + 0.5) * width,
                unfairness_mean: members.iter().map(|p| p.unfairness).sum::<f64>() / k,
                accuracy_mean,
                accuracy_var,
                count,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point(unfairness: f64, accuracy: f64) -> TradeoffPoint {
        TradeoffPoint {
            lambda: 0.0,
            seed: 0,
            accuracy,
            unfairness,
            notion: FairnessNotion::Dp,
            source: PointSource::Dst,
        }
    }

    #[test]
    fn binning() {
        let pts = vec![point(0.012, 0.8), point(0.3, 0.9), point(0.015, 0.6), point(0.0, 0.5)];
        let bins = bin_points(&pts, 0.01);
        assert_eq!(bins.iter().map(|b| b.index).collect::<Vec<_>>(), vec![0, 1, 30]);
        let b1 = &bins[1];
        assert_eq!(b1.count, 2);
        assert!((b1.accuracy_mean - 0.7).abs() < 1e-15);
        assert!((b1.accuracy_var - 0.01).abs() < 1e-15);
        assert!((b1.center - 0.015).abs() < 1e-15);
        let curve = TradeoffCurve::from_points(PointSource::Dst, FairnessNotion::Dp, 0.01, pts, vec![]);
        assert_eq!(curve.bin(30).unwrap().count, 1);
        assert!(!curve.is_partial());
    }
}
