//! Accuracy and group-fairness gaps of a prediction set.
//!
//! Groups are the distinct values of `S` present in the data. With more than
//! two groups a gap is aggregated over all group pairs, by maximum (default)
//! or mean.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::dependence::FairnessNotion;
use crate::error::{FateError, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredictionSet {
    pub y_pred: Vec<u32>,
    pub y_true: Vec<u32>,
    pub s: Vec<u32>,
}

impl PredictionSet {
    pub fn new(y_pred: Vec<u32>, y_true: Vec<u32>, s: Vec<u32>) -> Result<Self> {
        if y_pred.len() != y_true.len() {
            return Err(FateError::RowCountMismatch { left: y_pred.len(), right: y_true.len() });
        }
        if y_pred.len() != s.len() {
            return Err(FateError::RowCountMismatch { left: y_pred.len(), right: s.len() });
        }
        if y_pred.is_empty() {
            return Err(FateError::EmptyInput);
        }
        Ok(PredictionSet { y_pred, y_true, s })
    }

    pub fn len(&self) -> usize {
        self.y_pred.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y_pred.is_empty()
    }

    fn groups(&self) -> Result<Vec<u32>> {
        let groups: Vec<u32> = self.s.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
        if groups.len() < 2 {
            return Err(FateError::EmptyGroup(format!("only {} sensitive group(s) present", groups.len())));
        }
        Ok(groups)
    }

    /// `P(Ŷ = 1 | S = group, Y = y)`, or unconditional on `Y` when `y` is `None`.
    fn positive_rate(&self, group: u32, y: Option<u32>) -> Result<f64> {
        let mut total = 0usize;
        let mut positive = 0usize;
        for i in 0..self.len() {
            if self.s[i] == group && y.is_none_or(|v| self.y_true[i] == v) {
                total += 1;
                positive += usize::from(self.y_pred[i] == 1);
            }
        }
        if total == 0 {
            return Err(FateError::EmptyGroup(match y {
                Some(v) => format!("no rows with S={group} and Y={v}"),
                None => format!("no rows with S={group}"),
            }));
        }
        Ok(positive as f64 / total as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupAggregation {
    #[default]
    Max,
    Mean,
}

fn aggregate_pairs(groups: &[u32], agg: GroupAggregation, mut gap: impl FnMut(u32, u32) -> Result<f64>) -> Result<f64> {
    let mut max = 0.0f64;
    let mut sum = 0.0;
    let mut count = 0usize;
    for (k, &a) in groups.iter().enumerate() {
        for &b in &groups[k + 1..] {
            let g = gap(a, b)?;
            max = max.max(g);
            sum += g;
            count += 1;
        }
    }
    Ok(match agg {
        GroupAggregation::Max => max,
        GroupAggregation::Mean => sum / count as f64,
    })
}

pub fn accuracy(p: &PredictionSet) -> Result<f64> {
    if p.is_empty() {
        return Err(FateError::EmptyInput);
    }
    let correct = p.y_pred.iter().zip(&p.y_true).filter(|(a, b)| a == b).count();
    Ok(correct as f64 / p.len() as f64)
}

/// Demographic parity violation `|P(Ŷ=1|S=a) − P(Ŷ=1|S=b)|`.
pub fn dpv(p: &PredictionSet) -> Result<f64> {
    dpv_with(p, GroupAggregation::Max)
}

pub fn dpv_with(p: &PredictionSet, agg: GroupAggregation) -> Result<f64> {
    let groups = p.groups()?;
    let rates: Vec<f64> = groups.iter().map(|&g| p.positive_rate(g, None)).collect::<Result<_>>()?;
    aggregate_pairs(&groups, agg, |a, b| Ok((rates[idx(&groups, a)] - rates[idx(&groups, b)]).abs()))
}

fn idx(groups: &[u32], g: u32) -> usize {
    groups.binary_search(&g).expect("group listed")
}

/// Equal opportunity difference `|P(Ŷ=1|S=a,Y=1) − P(Ŷ=1|S=b,Y=1)|`.
pub fn eod(p: &PredictionSet) -> Result<f64> {
    eod_with(p, 1, GroupAggregation::Max)
}

pub fn eod_with(p: &PredictionSet, positive_class: u32, agg: GroupAggregation) -> Result<f64> {
    let groups = p.groups()?;
    let rates: Vec<f64> = groups.iter().map(|&g| p.positive_rate(g, Some(positive_class))).collect::<Result<_>>()?;
    aggregate_pairs(&groups, agg, |a, b| Ok((rates[idx(&groups, a)] - rates[idx(&groups, b)]).abs()))
}

/// Equality of odds difference: the gap in `P(Ŷ=1|Y=y,S)` averaged over the
/// target classes present.
pub fn eood(p: &PredictionSet) -> Result<f64> {
    eood_with(p, GroupAggregation::Max)
}

pub fn eood_with(p: &PredictionSet, agg: GroupAggregation) -> Result<f64> {
    let groups = p.groups()?;
    let classes: Vec<u32> = p.y_true.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    let mut rates = Vec::with_capacity(classes.len());
    for &y in &classes {
        let r: Vec<f64> = groups.iter().map(|&g| p.positive_rate(g, Some(y))).collect::<Result<_>>()?;
        rates.push(r);
    }
    aggregate_pairs(&groups, agg, |a, b| {
        let (ia, ib) = (idx(&groups, a), idx(&groups, b));
        Ok(rates.iter().map(|r| (r[ia] - r[ib]).abs()).sum::<f64>() / classes.len() as f64)
    })
}

/// The metric matching a fairness notion: DPV, EOD or EOOD.
pub fn unfairness(p: &PredictionSet, notion: FairnessNotion, agg: GroupAggregation) -> Result<f64> {
    match notion {
        FairnessNotion::Dp => dpv_with(p, agg),
        FairnessNotion::Eo { positive_class } => eod_with(p, positive_class, agg),
        FairnessNotion::Eoo => eood_with(p, agg),
    }
}
