use super::eigen::sym_eig;
use super::matrix::{dot, Matrix};
use crate::error::{FateError, Result};

/// Relative pivot threshold below which trailing pivots are treated as zero.
pub const PIVOT_DROP_TOL: f64 = 1e-10;

const SYMMETRY_TOL: f64 = 1e-10;

/// Rank-revealing factor `L` (n×k, full column rank) with `A ≈ L·Lᵀ` for a
/// symmetric positive semi-definite `A`.
///
/// Uses diagonally pivoted Cholesky and stops once every remaining pivot is
/// below `1e-10 · max diag(A)`. Rows of `L` stay in the original order, so
/// `L·Lᵀ` reproduces `A` without a permutation. If the pivoted factor does
/// not reproduce `A` (the matrix is slightly indefinite) the factor is
/// rebuilt from the non-negative part of the spectrum, provided the most
/// negative eigenvalue is no lower than `-jitter`.
pub fn cholesky_psd(a: &Matrix, jitter: f64) -> Result<Matrix> {
    a.ensure_symmetric(SYMMETRY_TOL)?;
    if jitter < 0.0 || !jitter.is_finite() {
        return Err(FateError::BadConfig(format!("jitter must be >= 0, got {jitter}")));
    }
    let n = a.rows();
    let mut diag = a.diagonal();
    let max_diag = diag.iter().cloned().fold(0.0, f64::max);
    let tol = PIVOT_DROP_TOL * max_diag;

    // columns[k][i] = L[i, k]
    let mut columns: Vec<Vec<f64>> = Vec::new();
    let mut used = vec![false; n];
    if max_diag > 0.0 {
        for _ in 0..n {
            let mut pivot = None;
            let mut best = tol;
            for i in 0..n {
                if !used[i] && diag[i] > best {
                    best = diag[i];
                    pivot = Some(i);
                }
            }
            let Some(p) = pivot else { break };
            used[p] = true;
            let root = diag[p].sqrt();
            let mut col = vec![0.0; n];
            col[p] = root;
            for j in 0..n {
                if used[j] {
                    continue;
                }
                let mut v = a[(j, p)];
                for c in &columns {
                    v -= c[j] * c[p];
                }
                col[j] = v / root;
                diag[j] -= col[j] * col[j];
            }
            columns.push(col);
        }
    }

    let k = columns.len();
    let l = Matrix::from_fn(n, k, |i, j| columns[j][i]);
    let residual = a.sub(&l.matmul_t(&l)?)?.frobenius_norm();
    if residual <= 1e-8 * a.frobenius_norm().max(1.0) {
        return Ok(l);
    }

    let eig = sym_eig(a)?;
    let min_eig = eig.values.last().copied().unwrap_or(0.0);
    if min_eig < -jitter {
        return Err(FateError::IndefiniteBeyondJitter { min_eigenvalue: min_eig, jitter });
    }
    let keep: Vec<usize> = (0..n).filter(|&j| eig.values[j] > tol).collect();
    Ok(Matrix::from_fn(n, keep.len(), |i, j| eig.vectors[(i, keep[j])] * eig.values[keep[j]].sqrt()))
}

/// Lower-triangular `R` with `C = R·Rᵀ` for a symmetric positive-definite `C`.
pub fn cholesky_strict(c: &Matrix) -> Result<Matrix> {
    c.ensure_symmetric(SYMMETRY_TOL)?;
    let n = c.rows();
    let max_diag = c.diagonal().iter().cloned().fold(0.0, f64::max);
    if max_diag <= 0.0 {
        return Err(FateError::NotPositiveDefinite);
    }
    let floor = 1e-12 * max_diag;
    let mut r = Matrix::zeros(n, n);
    for j in 0..n {
        let d = c[(j, j)] - dot(&r.row(j)[..j], &r.row(j)[..j]);
        if d <= floor || !d.is_finite() {
            return Err(FateError::NotPositiveDefinite);
        }
        let root = d.sqrt();
        r[(j, j)] = root;
        for i in (j + 1)..n {
            let v = c[(i, j)] - dot(&r.row(i)[..j], &r.row(j)[..j]);
            r[(i, j)] = v / root;
        }
    }
    Ok(r)
}

/// `R⁻¹·B` for lower-triangular `R`.
pub fn solve_lower(r: &Matrix, b: &Matrix) -> Matrix {
    let n = r.rows();
    let mut x = b.clone();
    for col in 0..b.cols() {
        for i in 0..n {
            let mut v = x[(i, col)];
            for k in 0..i {
                v -= r[(i, k)] * x[(k, col)];
            }
            x[(i, col)] = v / r[(i, i)];
        }
    }
    x
}

/// `R⁻ᵀ·B` for lower-triangular `R`.
pub fn solve_lower_transpose(r: &Matrix, b: &Matrix) -> Matrix {
    let n = r.rows();
    let mut x = b.clone();
    for col in 0..b.cols() {
        for i in (0..n).rev() {
            let mut v = x[(i, col)];
            for k in (i + 1)..n {
                v -= r[(k, i)] * x[(k, col)];
            }
            x[(i, col)] = v / r[(i, i)];
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::test_support::{random_matrix, random_psd};
    use proptest::prelude::*;

    fn reconstruction_error(a: &Matrix, l: &Matrix) -> f64 {
        a.sub(&l.matmul_t(l).unwrap()).unwrap().frobenius_norm()
    }

    #[test]
    fn identity_factor_is_identity() {
        let l = cholesky_psd(&Matrix::identity(3), 0.0).unwrap();
        assert_eq!(l, Matrix::identity(3));
    }

    #[test]
    fn two_by_two_by_hand() {
        let a = Matrix::from_rows(&[[4.0, 2.0], [2.0, 2.0]]).unwrap();
        let l = cholesky_psd(&a, 0.0).unwrap();
        assert_eq!(l, Matrix::from_rows(&[[2.0, 0.0], [1.0, 1.0]]).unwrap());
        let strict = cholesky_strict(&a).unwrap();
        assert_eq!(strict, l);
    }

    #[test]
    fn rank_one_outer_product_gives_single_column() {
        let v = Matrix::column_vector(&[1.0, 2.0, 3.0]);
        let a = v.matmul_t(&v).unwrap();
        let l = cholesky_psd(&a, 0.0).unwrap();
        assert_eq!(l.cols(), 1);
        assert!(reconstruction_error(&a, &l) <= 1e-10);
    }

    #[test]
    fn rank_deficient_gram_drops_trailing_pivots() {
        let x = random_matrix(10, 3, 7);
        let a = x.matmul_t(&x).unwrap();
        let l = cholesky_psd(&a, 0.0).unwrap();
        assert_eq!(l.cols(), 3);
        assert!(reconstruction_error(&a, &l) <= 1e-8 * a.frobenius_norm());
    }

    #[test]
    fn errors() {
        let asym = Matrix::from_rows(&[[1.0, 2.0], [0.0, 1.0]]).unwrap();
        assert!(matches!(cholesky_psd(&asym, 0.0), Err(FateError::NotSymmetric(_))));
        let indefinite = Matrix::from_rows(&[[1.0, 0.0], [0.0, -1.0]]).unwrap();
        assert!(matches!(cholesky_psd(&indefinite, 0.5), Err(FateError::IndefiniteBeyondJitter { .. })));
        assert!(matches!(cholesky_strict(&indefinite), Err(FateError::NotPositiveDefinite)));
    }

    #[test]
    fn slightly_indefinite_within_jitter_is_accepted() {
        let a = Matrix::from_rows(&[[1.0, 0.0], [0.0, -1e-3]]).unwrap();
        let l = cholesky_psd(&a, 1e-2).unwrap();
        assert_eq!(l.cols(), 1);
        assert!((l.matmul_t(&l).unwrap()[(0, 0)] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn triangular_solves_invert_the_factor() {
        let c = random_psd(5, 3);
        let r = cholesky_strict(&c).unwrap();
        let b = random_matrix(5, 2, 4);
        let x = solve_lower(&r, &b);
        assert!(r.matmul(&x).unwrap().sub(&b).unwrap().max_abs() < 1e-12);
        let y = solve_lower_transpose(&r, &b);
        assert!(r.transpose().matmul(&y).unwrap().sub(&b).unwrap().max_abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn psd_round_trip(seed in 0u64..10_000, n in 1usize..12, rank in 1usize..12) {
            let x = random_matrix(n, rank, seed);
            let a = x.matmul_t(&x).unwrap();
            let l = cholesky_psd(&a, 0.0).unwrap();
            prop_assert!(l.cols() <= n.min(rank));
            prop_assert!(reconstruction_error(&a, &l) <= 1e-8 * a.frobenius_norm().max(1.0));
        }
    }
}
