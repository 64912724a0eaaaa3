//! Closed-form fair encoder.
//!
//! For a basis factor `L` (n×m) with `L·Lᵀ = K`, the encoder maximizing
//!
//! ```text
//! (1−λ)·Dep(Z, Y) − λ·Σ_slices Dep(Z_slice, S_slice)
//! ```
//!
//! subject to the disentanglement constraint `Θ·L·C·Lᵀ·Θᵀ = I_r` is given by
//! the top-`r` eigenvectors `U` of `B·u = τ·C·u` with
//!
//! ```text
//! B = (1−λ)/n²·(LᵀHL_Y)(LᵀHL_Y)ᵀ − λ·Σ_y 1/n_y²·(L_yᵀH L_{S,y})(L_yᵀH L_{S,y})ᵀ
//! C = (1/n)·LᵀHL + γI
//! ```
//!
//! The representer coefficients are `Θ = Uᵀ·L†`; because `L` has full column
//! rank, applying them to kernel evaluations equals applying `Uᵀ` to the
//! basis features, which is what [`FairEncoder::theta`] stores.

use serde::{Deserialize, Serialize};

use crate::dependence::{dep_of_representation, notion_slices, ConditionSlice, FairnessNotion};
use crate::error::{FateError, Result};
use crate::kernels::{center, onehot, FeatureMap, GramFactor};
use crate::linalg::{generalized_sym_eig, pinv_apply, Matrix};

pub const DEFAULT_GAMMA: f64 = 1e-4;

/// Scalar multiplying `C` on the right-hand side of the eigenproblem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RhsScaling {
    /// `B·u = τ·C·u`.
    #[default]
    Tau,
    /// `B·u = τ·λ·C·u`; inspection only, undefined at λ = 0.
    Lambda,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncoderConfig {
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    /// Output dimension; `None` means one less than the number of target classes.
    #[serde(default)]
    pub r: Option<usize>,
    #[serde(default)]
    pub rhs: RhsScaling,
}

fn default_gamma() -> f64 {
    DEFAULT_GAMMA
}

impl Default for EncoderConfig {
    fn default() -> Self {
        EncoderConfig { gamma: DEFAULT_GAMMA, r: None, rhs: RhsScaling::Tau }
    }
}

impl EncoderConfig {
    pub fn output_dim(&self, num_target_classes: usize) -> usize {
        self.r.unwrap_or_else(|| num_target_classes.saturating_sub(1).max(1))
    }
}

#[derive(Debug, Clone)]
pub struct EncoderProblem<'a> {
    pub lambda: f64,
    pub gamma: f64,
    pub r: usize,
    pub notion: FairnessNotion,
    pub rhs: RhsScaling,
    /// Basis factor `L` over the n training samples.
    pub features: &'a GramFactor,
    pub targets: &'a [u32],
    pub num_target_classes: usize,
    pub sensitive: &'a [u32],
    pub num_sensitive_classes: usize,
}

impl<'a> EncoderProblem<'a> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        lambda: f64,
        config: &EncoderConfig,
        notion: FairnessNotion,
        features: &'a GramFactor,
        targets: &'a [u32],
        num_target_classes: usize,
        sensitive: &'a [u32],
        num_sensitive_classes: usize,
    ) -> Self {
        EncoderProblem {
            lambda,
            gamma: config.gamma,
            r: config.output_dim(num_target_classes),
            notion,
            rhs: config.rhs,
            features,
            targets,
            num_target_classes,
            sensitive,
            num_sensitive_classes,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.lambda) {
            return Err(FateError::BadConfig(format!("λ must lie in [0, 1), got {}", self.lambda)));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(FateError::BadConfig(format!("γ must be > 0, got {}", self.gamma)));
        }
        if self.rhs == RhsScaling::Lambda && self.lambda == 0.0 {
            return Err(FateError::BadConfig("λ-scaled right-hand side needs λ > 0".into()));
        }
        let n = self.features.rows();
        if self.targets.len() != n || self.sensitive.len() != n {
            return Err(FateError::RowCountMismatch {
                left: n,
                right: if self.targets.len() != n { self.targets.len() } else { self.sensitive.len() },
            });
        }
        if self.r == 0 {
            return Err(FateError::BadConfig("output dimension r must be >= 1".into()));
        }
        let usable = self.features.dim().min(n);
        if self.r > usable {
            return Err(FateError::RankTooHigh { requested: self.r, rank: usable });
        }
        Ok(())
    }

    pub fn slices(&self) -> Result<Vec<ConditionSlice>> {
        notion_slices(self.targets, self.num_target_classes, self.notion)
    }
}

/// The λ-free pieces of `B`: `B(λ) = (1−λ)·utility − λ·fairness`.
#[derive(Debug, Clone)]
pub struct BParts {
    pub utility: Matrix,
    pub fairness: Matrix,
}

impl BParts {
    pub fn combine(&self, lambda: f64) -> Matrix {
        let mut b = self.utility.scale(1.0 - lambda);
        b.add_scaled(-lambda, &self.fairness).expect("parts share a shape");
        b.symmetrize();
        b
    }
}

/// `(1/n²)·(LᵀH·L_A)(LᵀH·L_A)ᵀ` over the given factor rows.
fn cross_term(l: &Matrix, labels: &[u32], num_classes: usize) -> Result<Matrix> {
    let n = l.rows() as f64;
    let centered_labels = center(&onehot(labels, num_classes)?);
    let a = l.t_matmul(&centered_labels)?;
    let mut out = a.matmul_t(&a)?;
    out.scale_in_place(1.0 / (n * n));
    Ok(out)
}

pub fn build_b_parts(problem: &EncoderProblem<'_>) -> Result<BParts> {
    let l = &problem.features.factor;
    let utility = cross_term(l, problem.targets, problem.num_target_classes)?;
    let m = l.cols();
    let mut fairness = Matrix::zeros(m, m);
    for slice in problem.slices()? {
        let ly = l.select_rows(&slice.rows);
        let sy: Vec<u32> = slice.rows.iter().map(|&i| problem.sensitive[i]).collect();
        fairness.add_scaled(1.0, &cross_term(&ly, &sy, problem.num_sensitive_classes)?)?;
    }
    Ok(BParts { utility, fairness })
}

pub fn build_b(problem: &EncoderProblem<'_>) -> Result<Matrix> {
    Ok(build_b_parts(problem)?.combine(problem.lambda))
}

/// `C = (1/n)·LᵀHL + γI`.
pub fn build_c(l: &GramFactor, gamma: f64) -> Result<Matrix> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(FateError::BadConfig(format!("γ must be > 0, got {gamma}")));
    }
    let n = l.rows().max(1) as f64;
    let mut c = center(&l.factor).gram();
    c.scale_in_place(1.0 / n);
    c.add_to_diagonal(gamma);
    Ok(c)
}

/// Solved encoder: `Z = φ(X)·Θᵀ` for the stored basis `φ`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FairEncoder {
    /// r×m projection acting on basis features.
    pub theta: Matrix,
    pub basis: Option<FeatureMap>,
    pub lambda: f64,
    pub gamma: f64,
    pub notion: FairnessNotion,
    /// Sum of the top-r generalized eigenvalues.
    pub objective_value: f64,
    /// All generalized eigenvalues, descending.
    pub eigenvalues: Vec<f64>,
}

impl FairEncoder {
    pub fn output_dim(&self) -> usize {
        self.theta.rows()
    }

    /// `Z = Φ·Θᵀ` for basis features `Φ` (n×m).
    pub fn encode_features(&self, features: &Matrix) -> Result<Matrix> {
        if features.cols() != self.theta.cols() {
            return Err(FateError::DimensionMismatch { expected: self.theta.cols(), got: features.cols() });
        }
        features.matmul_t(&self.theta)
    }

    /// Minimum-norm representer coefficients `Θ_rep = Uᵀ·L†` (r×n) over the
    /// training factor `L`, so that `Z = K·Θ_repᵀ`.
    pub fn representer_coefficients(&self, l: &GramFactor) -> Result<Matrix> {
        let solved = pinv_apply(&l.factor, &self.theta.transpose())?;
        Ok(solved.solution.transpose())
    }
}

pub fn solve_encoder(problem: &EncoderProblem<'_>) -> Result<FairEncoder> {
    solve_encoder_with_basis(problem, None)
}

pub fn solve_encoder_with_basis(problem: &EncoderProblem<'_>, basis: Option<FeatureMap>) -> Result<FairEncoder> {
    problem.validate()?;
    if let Some(b) = &basis {
        if b.output_dim() != problem.features.dim() {
            return Err(FateError::DimensionMismatch { expected: problem.features.dim(), got: b.output_dim() });
        }
    }
    let b = build_b(problem)?;
    let mut c = build_c(problem.features, problem.gamma)?;
    if problem.rhs == RhsScaling::Lambda {
        c.scale_in_place(problem.lambda);
    }
    let eig = generalized_sym_eig(&b, &c)?;
    let u = eig.top(problem.r);
    let objective_value = eig.values[..problem.r].iter().sum();
    Ok(FairEncoder {
        theta: u.transpose(),
        basis,
        lambda: problem.lambda,
        gamma: problem.gamma,
        notion: problem.notion,
        objective_value,
        eigenvalues: eig.values,
    })
}

/// Maps raw inputs through the stored basis and the projection.
pub fn encode(encoder: &FairEncoder, x_new: &Matrix) -> Result<Matrix> {
    let basis = encoder
        .basis
        .as_ref()
        .ok_or_else(|| FateError::BadConfig("encoder was solved without a stored basis".into()))?;
    if x_new.cols() != basis.input_dim() {
        return Err(FateError::DimensionMismatch { expected: basis.input_dim(), got: x_new.cols() });
    }
    encoder.encode_features(&basis.apply(x_new)?)
}

/// `(1−λ)·Dep(Z, Y) − λ·Σ Dep(Z, S | slice)` evaluated on a representation.
#[allow(clippy::too_many_arguments)]
pub fn trace_objective(
    z: &Matrix,
    targets: &[u32],
    num_target_classes: usize,
    sensitive: &[u32],
    num_sensitive_classes: usize,
    notion: FairnessNotion,
    lambda: f64,
) -> Result<f64> {
    let utility = dep_of_representation(z, targets, num_target_classes, &ConditionSlice::all(z.rows()))?;
    let mut fairness = 0.0;
    for slice in notion_slices(targets, num_target_classes, notion)? {
        fairness += dep_of_representation(z, sensitive, num_sensitive_classes, &slice)?;
    }
    Ok((1.0 - lambda) * utility - lambda * fairness)
}
