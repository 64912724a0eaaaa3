//! Dense real linear algebra used by the closed-form encoder.

mod cholesky;
mod eigen;
mod lstsq;
mod matrix;

pub use cholesky::{cholesky_psd, cholesky_strict, solve_lower, solve_lower_transpose, PIVOT_DROP_TOL};
pub use eigen::{generalized_sym_eig, sym_eig, EigResult};
pub use lstsq::{pinv_apply, LeastSquares, RANK_TOL};
pub use matrix::{axpy, dot, Matrix};

#[cfg(test)]
pub(crate) mod test_support {
    use super::Matrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub fn random_matrix(rows: usize, cols: usize, seed: u64) -> Matrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Matrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
    }

    pub fn random_symmetric(n: usize, seed: u64) -> Matrix {
        let a = random_matrix(n, n, seed);
        a.add(&a.transpose()).unwrap().scale(0.5)
    }

    /// `MᵀM + I`.
    pub fn random_psd(n: usize, seed: u64) -> Matrix {
        let m = random_matrix(n, n, seed);
        let mut c = m.gram();
        c.add_to_diagonal(1.0);
        c
    }
}
