use serde::{Deserialize, Serialize};

use crate::error::{FateError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Binning {
    /// Equal-frequency bins.
    Count(usize),
    /// Explicit ascending edges.
    Edges(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Discretized {
    pub codes: Vec<u32>,
    pub edges: Vec<f64>,
}

/// Code of `v` is the number of edges strictly below it.
pub fn apply_edges(values: &[f64], edges: &[f64]) -> Vec<u32> {
    values.iter().map(|&v| edges.partition_point(|&e| e < v) as u32).collect()
}

pub fn discretize_column(values: &[f64], binning: &Binning) -> Result<Discretized> {
    if values.is_empty() {
        return Err(FateError::EmptyInput);
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(FateError::BadConfig("cannot discretize non-finite values".into()));
    }
    let edges = match binning {
        Binning::Edges(edges) => {
            if edges.windows(2).any(|w| w[0] >= w[1]) {
                return Err(FateError::BadConfig("bin edges must be strictly ascending".into()));
            }
            edges.clone()
        }
        Binning::Count(bins) => {
            if *bins < 2 {
                return Err(FateError::BadConfig(format!("need at least 2 bins, got {bins}")));
            }
            let mut sorted = values.to_vec();
            sorted.sort_by(f64::total_cmp);
            let n = sorted.len();
            if sorted[0] == sorted[n - 1] {
                return Err(FateError::DegenerateColumn);
            }
            let mut edges: Vec<f64> = Vec::with_capacity(bins - 1);
            for k in 1..*bins {
                let pos = ((k * n) as f64 / *bins as f64).round() as usize;
                let pos = nearest_boundary(&sorted, pos.clamp(1, n - 1));
                let edge = 0.5 * (sorted[pos - 1] + sorted[pos]);
                if edges.last().is_none_or(|&last| edge > last) {
                    edges.push(edge);
                }
            }
            edges
        }
    };
    Ok(Discretized { codes: apply_edges(values, &edges), edges })
}

/// Closest index `p` to `pos` with `sorted[p − 1] < sorted[p]`.
fn nearest_boundary(sorted: &[f64], pos: usize) -> usize {
    let is_boundary = |p: usize| sorted[p - 1] < sorted[p];
    (0..sorted.len())
        .flat_map(|k| [pos.checked_sub(k), pos.checked_add(k)])
        .flatten()
        .find(|&p| (1..sorted.len()).contains(&p) && is_boundary(p))
        .expect("a non-constant column has a boundary")
}
