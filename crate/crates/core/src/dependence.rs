//! Empirical kernel dependence between a representation and discrete labels,
//! unconditional and conditioned on a target class.
//!
//! For a slice of `n` samples the statistic is `(1/n²)·‖Θ·K·H·L_A‖²_F`,
//! where `K = L_X·L_Xᵀ` and `L_A` is the one-hot factor of the label. It is
//! always evaluated in factored form.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{FateError, Result};
use crate::kernels::{center, GramFactor};
use crate::linalg::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FairnessNotion {
    /// Demographic parity: `Ŷ ⊥ S`.
    Dp,
    /// Equalized opportunity: `Ŷ ⊥ S | Y = positive_class`.
    Eo {
        #[serde(default = "default_positive_class")]
        positive_class: u32,
    },
    /// Equality of odds: `Ŷ ⊥ S | Y = y` for every class `y`.
    Eoo,
}

fn default_positive_class() -> u32 {
    1
}

impl FairnessNotion {
    pub const EO: FairnessNotion = FairnessNotion::Eo { positive_class: 1 };

    pub fn name(&self) -> &'static str {
        match self {
            FairnessNotion::Dp => "dp",
            FairnessNotion::Eo { .. } => "eo",
            FairnessNotion::Eoo => "eoo",
        }
    }
}

impl fmt::Display for FairnessNotion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FairnessNotion {
    type Err = FateError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dp" => Ok(FairnessNotion::Dp),
            "eo" => Ok(FairnessNotion::EO),
            "eoo" => Ok(FairnessNotion::Eoo),
            other => Err(FateError::BadConfig(format!("unknown fairness notion `{other}`"))),
        }
    }
}

/// Rows of a dataset that share a target label (or all rows).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionSlice {
    pub label: Option<u32>,
    pub rows: Vec<usize>,
}

impl ConditionSlice {
    pub fn all(n: usize) -> Self {
        ConditionSlice { label: None, rows: (0..n).collect() }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

pub fn slice_by_label(y: &[u32], label: Option<u32>) -> Result<ConditionSlice> {
    match label {
        None => Ok(ConditionSlice::all(y.len())),
        Some(l) => {
            let rows: Vec<usize> = (0..y.len()).filter(|&i| y[i] == l).collect();
            if rows.is_empty() {
                return Err(FateError::EmptyClass(l));
            }
            Ok(ConditionSlice { label: Some(l), rows })
        }
    }
}

/// Slices entering the fairness term of `notion`, in class order.
pub fn notion_slices(y: &[u32], num_target_classes: usize, notion: FairnessNotion) -> Result<Vec<ConditionSlice>> {
    match notion {
        FairnessNotion::Dp => Ok(vec![slice_by_label(y, None)?]),
        FairnessNotion::Eo { positive_class } => Ok(vec![slice_by_label(y, Some(positive_class))?]),
        FairnessNotion::Eoo => (0..num_target_classes as u32).map(|c| slice_by_label(y, Some(c))).collect(),
    }
}

/// `(1/n²)·‖Θ·L_X·L_Xᵀ·H·L_A‖²_F` for `Θ` (r×n) over the same `n` rows as
/// both factors.
pub fn dep_empirical(theta: &Matrix, kx: &GramFactor, a: &GramFactor) -> Result<f64> {
    let n = kx.rows();
    if theta.cols() != n || a.rows() != n {
        return Err(FateError::ShapeMismatch(format!(
            "dep_empirical: Θ {:?}, L_X {:?}, L_A {:?}",
            theta.shape(),
            kx.factor.shape(),
            a.factor.shape()
        )));
    }
    if n == 0 {
        return Err(FateError::EmptyInput);
    }
    let cross = kx.factor.t_matmul(&center(&a.factor))?;
    let projected = theta.matmul(&kx.factor)?;
    let q = projected.matmul(&cross)?;
    Ok(q.frobenius_norm_sq() / (n * n) as f64)
}

/// `(1/n_y²)·‖Z_sliceᵀ·H·L_A‖²_F` for a representation `Z` (n×r) given
/// directly, restricted to `slice`.
pub fn dep_of_representation(z: &Matrix, labels: &[u32], num_classes: usize, slice: &ConditionSlice) -> Result<f64> {
    if z.rows() != labels.len() {
        return Err(FateError::ShapeMismatch(format!("representation has {} rows, labels {}", z.rows(), labels.len())));
    }
    if slice.is_empty() {
        return Err(FateError::EmptyInput);
    }
    let zs = center(&z.select_rows(&slice.rows));
    let r = z.cols();
    // Zᵀ·H·L_A = (H·Z)ᵀ·L_A: per-class column sums of the centered slice.
    let mut sums = Matrix::zeros(num_classes, r);
    for (k, &i) in slice.rows.iter().enumerate() {
        let l = labels[i] as usize;
        if l >= num_classes {
            return Err(FateError::LabelOutOfRange { label: labels[i], classes: num_classes });
        }
        for (s, v) in sums.row_mut(l).iter_mut().zip(zs.row(k)) {
            *s += v;
        }
    }
    let n = slice.len() as f64;
    Ok(sums.frobenius_norm_sq() / (n * n))
}

/// One summand of a notion's fairness term.
#[derive(Debug, Clone)]
pub struct DepTerm {
    /// The `1/n_y²` normalization already folded into `value`.
    pub scale: f64,
    pub slice: ConditionSlice,
    pub value: f64,
}

/// Per-slice dependence of `Z` on the sensitive attribute under `notion`.
pub fn dep_terms_for_notion(
    z: &Matrix,
    y: &[u32],
    num_target_classes: usize,
    s: &[u32],
    num_sensitive_classes: usize,
    notion: FairnessNotion,
) -> Result<Vec<DepTerm>> {
    if y.len() != s.len() {
        return Err(FateError::RowCountMismatch { left: y.len(), right: s.len() });
    }
    notion_slices(y, num_target_classes, notion)?
        .into_iter()
        .map(|slice| {
            let value = dep_of_representation(z, s, num_sensitive_classes, &slice)?;
            let n = slice.len() as f64;
            Ok(DepTerm { scale: 1.0 / (n * n), slice, value })
        })
        .collect()
}
