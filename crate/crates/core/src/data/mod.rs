//! Datasets `(X, Y, S)`: loading, synthetic generation and discretization.

mod discretize;
mod embeddings;
mod synthetic;
mod tabular;

use serde::{Deserialize, Serialize};

use crate::error::{FateError, Result};
use crate::kernels::onehot;
use crate::linalg::Matrix;

pub use discretize::{apply_edges, discretize_column, Binning, Discretized};
pub use embeddings::{load_embeddings, read_matrix, write_matrix_bin, MATRIX_MAGIC};
pub use synthetic::{generate_synthetic, EntanglementMode, SyntheticSpec, RADIAL_OFFSET};
pub use tabular::{load_csv, write_csv, CsvSchema, LabelMap};

/// Where a dataset came from, with everything needed to rebuild it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case")]
pub enum Provenance {
    Csv {
        path: String,
        target_map: LabelMap,
        sensitive_map: LabelMap,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sensitive_edges: Option<Vec<f64>>,
    },
    Embeddings {
        path: String,
        labels_path: String,
        target_map: LabelMap,
        sensitive_map: LabelMap,
    },
    Synthetic(SyntheticSpec),
    InMemory,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub x: Matrix,
    pub y: Vec<u32>,
    pub s: Vec<u32>,
    pub num_target_classes: usize,
    pub num_sensitive_classes: usize,
    pub feature_names: Vec<String>,
    pub provenance: Provenance,
}

impl Dataset {
    /// Class counts default to the observed label ranges.
    pub fn new(x: Matrix, y: Vec<u32>, s: Vec<u32>) -> Result<Self> {
        let c_y = y.iter().max().map_or(0, |&m| m as usize + 1);
        let c_s = s.iter().max().map_or(0, |&m| m as usize + 1);
        let names = (0..x.cols()).map(|j| format!("x{j}")).collect();
        Dataset::with_classes(x, y, s, c_y, c_s, names, Provenance::InMemory)
    }

    pub fn with_classes(
        x: Matrix,
        y: Vec<u32>,
        s: Vec<u32>,
        num_target_classes: usize,
        num_sensitive_classes: usize,
        feature_names: Vec<String>,
        provenance: Provenance,
    ) -> Result<Self> {
        if y.len() != x.rows() {
            return Err(FateError::RowCountMismatch { left: x.rows(), right: y.len() });
        }
        if s.len() != x.rows() {
            return Err(FateError::RowCountMismatch { left: x.rows(), right: s.len() });
        }
        if x.rows() == 0 {
            return Err(FateError::EmptyInput);
        }
        if feature_names.len() != x.cols() {
            return Err(FateError::DimensionMismatch { expected: x.cols(), got: feature_names.len() });
        }
        if !x.is_finite() {
            return Err(FateError::BadConfig("features contain non-finite values".into()));
        }
        for (labels, classes) in [(&y, num_target_classes), (&s, num_sensitive_classes)] {
            if let Some(&bad) = labels.iter().find(|&&v| v as usize >= classes) {
                return Err(FateError::LabelOutOfRange { label: bad, classes });
            }
        }
        Ok(Dataset { x, y, s, num_target_classes, num_sensitive_classes, feature_names, provenance })
    }

    pub fn len(&self) -> usize {
        self.x.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.x.rows() == 0
    }

    pub fn dim(&self) -> usize {
        self.x.cols()
    }

    /// Label-space input `[one-hot(Y), one-hot(S)]`, optionally followed by `X`.
    pub fn label_space_input(&self, include_x: bool) -> Result<Matrix> {
        let labels = onehot(&self.y, self.num_target_classes)?.hcat(&onehot(&self.s, self.num_sensitive_classes)?)?;
        if include_x {
            labels.hcat(&self.x)
        } else {
            Ok(labels)
        }
    }

    pub fn select_rows(&self, rows: &[usize]) -> Dataset {
        Dataset {
            x: self.x.select_rows(rows),
            y: rows.iter().map(|&i| self.y[i]).collect(),
            s: rows.iter().map(|&i| self.s[i]).collect(),
            num_target_classes: self.num_target_classes,
            num_sensitive_classes: self.num_sensitive_classes,
            feature_names: self.feature_names.clone(),
            provenance: self.provenance.clone(),
        }
    }
}
