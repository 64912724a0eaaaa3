use crate::dependence::FairnessNotion;
use crate::encoder::FairEncoder;
use crate::error::{FateError, Result};
use crate::kernels::FeatureMap;
use crate::linalg::Matrix;

use super::mlp::Mlp;
use super::sgd::{train_loop, SgdConfig, StepOutput};

/// Constants of the feature-extractor objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveSpec {
    pub lambda: f64,
    pub notion: FairnessNotion,
    pub num_target_classes: usize,
    pub num_sensitive_classes: usize,
}

#[derive(Debug, Clone)]
pub struct ObjectiveValue {
    /// `J = (1−λ)·Dep(Z, Y) − λ·Σ Dep(Z_slice, S_slice)`.
    pub value: f64,
    /// `∂J/∂params`, ordered as [`Mlp::params`].
    pub grad: Vec<f64>,
    /// Target classes whose slice had fewer than two rows in the batch.
    pub skipped_slices: Vec<u32>,
}

/// `(1/n²)·‖Zᵀ·H·L_A‖²_F` and its gradient with respect to `Z`.
fn dep_with_grad(z: &Matrix, labels: &[u32], num_classes: usize) -> Result<(f64, Matrix)> {
    let (n, r) = z.shape();
    let mut sums = Matrix::zeros(num_classes, r);
    let mut counts = vec![0usize; num_classes];
    let means = z.column_means();
    for (i, &l) in labels.iter().enumerate() {
        let l = l as usize;
        if l >= num_classes {
            return Err(FateError::LabelOutOfRange { label: l as u32, classes: num_classes });
        }
        counts[l] += 1;
        for ((s, v), m) in sums.row_mut(l).iter_mut().zip(z.row(i)).zip(&means) {
            *s += v - m;
        }
    }
    let nf = n as f64;
    let scale = 1.0 / (nf * nf);
    let value = sums.frobenius_norm_sq() * scale;
    // Row i of H·L_A is e_{a_i} − p, so the gradient row is 2/n²·(S[a_i] − Σ_k p_k·S[k]).
    let mut mixed = vec![0.0; r];
    for (k, &c) in counts.iter().enumerate() {
        for (mv, sv) in mixed.iter_mut().zip(sums.row(k)) {
            *mv += c as f64 / nf * sv;
        }
    }
    let mut grad = Matrix::zeros(n, r);
    for (i, &l) in labels.iter().enumerate() {
        for ((g, s), m) in grad.row_mut(i).iter_mut().zip(sums.row(l as usize)).zip(&mixed) {
            *g = 2.0 * scale * (s - m);
        }
    }
    Ok((value, grad))
}

/// Objective value and parameter gradient on one batch for a frozen encoder.
pub fn objective_and_grad(
    net: &Mlp,
    x: &Matrix,
    y: &[u32],
    s: &[u32],
    encoder: &FairEncoder,
    basis: &FeatureMap,
    spec: &ObjectiveSpec,
) -> Result<ObjectiveValue> {
    let n = x.rows();
    if y.len() != n || s.len() != n {
        return Err(FateError::RowCountMismatch { left: n, right: if y.len() != n { y.len() } else { s.len() } });
    }
    if n < 2 {
        return Err(FateError::DegenerateBatch(format!("batch has {n} row(s)")));
    }
    let cache = net.forward_cached(x)?;
    let phi = basis.apply(&cache.output)?;
    let z = encoder.encode_features(&phi)?;

    let (utility, mut grad_z) = dep_with_grad(&z, y, spec.num_target_classes)?;
    let mut value = (1.0 - spec.lambda) * utility;
    grad_z.scale_in_place(1.0 - spec.lambda);

    let slices: Vec<(Option<u32>, Vec<usize>)> = match spec.notion {
        FairnessNotion::Dp => vec![(None, (0..n).collect())],
        FairnessNotion::Eo { positive_class } => vec![(Some(positive_class), rows_with(y, positive_class))],
        FairnessNotion::Eoo => (0..spec.num_target_classes as u32).map(|c| (Some(c), rows_with(y, c))).collect(),
    };
    let mut skipped_slices = Vec::new();
    for (label, rows) in slices {
        if rows.len() < 2 {
            let label = label.expect("the full batch has at least two rows");
            log::warn!("skipping fairness slice Y={label}: {} row(s) in batch", rows.len());
            skipped_slices.push(label);
            continue;
        }
        let zs = z.select_rows(&rows);
        let ss: Vec<u32> = rows.iter().map(|&i| s[i]).collect();
        let (dep, g) = dep_with_grad(&zs, &ss, spec.num_sensitive_classes)?;
        value -= spec.lambda * dep;
        for (k, &i) in rows.iter().enumerate() {
            for (gz, gs) in grad_z.row_mut(i).iter_mut().zip(g.row(k)) {
                *gz -= spec.lambda * gs;
            }
        }
    }

    let grad_phi = grad_z.matmul(&encoder.theta)?;
    let grad_features = basis.backward(&cache.output, &grad_phi)?;
    let (grad, _) = net.backward(&cache, &grad_features)?;
    Ok(ObjectiveValue { value, grad, skipped_slices })
}

fn rows_with(y: &[u32], label: u32) -> Vec<usize> {
    (0..y.len()).filter(|&i| y[i] == label).collect()
}

/// Runs SGD ascent on `J` for a frozen encoder; returns the per-epoch trace
/// of `−J`.
#[allow(clippy::too_many_arguments)]
pub fn train_feature_extractor(
    net: &mut Mlp,
    x: &Matrix,
    y: &[u32],
    s: &[u32],
    encoder: &FairEncoder,
    basis: &FeatureMap,
    spec: &ObjectiveSpec,
    config: &SgdConfig,
) -> Result<Vec<f64>> {
    let mut params = net.params();
    let mut scratch = net.clone();
    let trace = train_loop(&mut params, x.rows(), config, |p, rows| {
        scratch.set_params(p)?;
        let xb = x.select_rows(rows);
        let yb: Vec<u32> = rows.iter().map(|&i| y[i]).collect();
        let sb: Vec<u32> = rows.iter().map(|&i| s[i]).collect();
        let out = objective_and_grad(&scratch, &xb, &yb, &sb, encoder, basis, spec)?;
        Ok(StepOutput { loss: -out.value, grad: out.grad.into_iter().map(|g| -g).collect() })
    })?;
    net.set_params(&params)?;
    Ok(trace)
}
