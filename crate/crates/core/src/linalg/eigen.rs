//! Symmetric and symmetric-definite eigensolvers.
//!
//! `sym_eig` reduces to tridiagonal form with Householder reflections and
//! then runs the implicit QL iteration with Wilkinson-style shifts on the
//! tridiagonal matrix, accumulating the rotations into the eigenvectors.

use super::cholesky::{cholesky_strict, solve_lower, solve_lower_transpose};
use super::matrix::Matrix;
use crate::error::{FateError, Result};

const SYMMETRY_TOL: f64 = 1e-10;
const MAX_QL_SWEEPS: usize = 60;

/// Eigenpairs sorted by descending eigenvalue; column `j` of `vectors`
/// pairs with `values[j]`.
#[derive(Debug, Clone)]
pub struct EigResult {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

impl EigResult {
    /// First `r` eigenvectors as an n×r matrix.
    pub fn top(&self, r: usize) -> Matrix {
        let idx: Vec<usize> = (0..r).collect();
        self.vectors.select_columns(&idx)
    }
}

pub fn sym_eig(a: &Matrix) -> Result<EigResult> {
    a.ensure_symmetric(SYMMETRY_TOL)?;
    let n = a.rows();
    if n == 0 {
        return Ok(EigResult { values: vec![], vectors: Matrix::zeros(0, 0) });
    }
    let mut v = a.clone();
    v.symmetrize();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tridiagonalize(&mut v, &mut d, &mut e);
    tridiagonal_ql(&mut v, &mut d, &mut e)?;

    let mut order: Vec<usize> = (0..n).collect();
    // Stable sort keeps solver order among exact ties.
    order.sort_by(|&i, &j| d[j].partial_cmp(&d[i]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| d[i]).collect();
    let vectors = v.select_columns(&order);
    Ok(EigResult { values, vectors })
}

/// Solves `B·u = τ·C·u` for symmetric `B` and symmetric positive-definite `C`.
///
/// With `C = R·Rᵀ`, the standard problem `R⁻¹·B·R⁻ᵀ·w = τ·w` is solved and
/// mapped back by `u = R⁻ᵀ·w`, which makes the eigenvectors C-orthonormal.
pub fn generalized_sym_eig(b: &Matrix, c: &Matrix) -> Result<EigResult> {
    if b.shape() != c.shape() || b.rows() != b.cols() {
        return Err(FateError::ShapeMismatch(format!(
            "generalized eigenproblem: B {:?}, C {:?}",
            b.shape(),
            c.shape()
        )));
    }
    b.ensure_symmetric(SYMMETRY_TOL)?;
    let r = cholesky_strict(c)?;
    // M = R⁻¹ B R⁻ᵀ = R⁻¹ (R⁻¹ B)ᵀ since B is symmetric.
    let left = solve_lower(&r, b);
    let mut m = solve_lower(&r, &left.transpose());
    m.symmetrize();
    let std = sym_eig(&m)?;
    let vectors = solve_lower_transpose(&r, &std.vectors);
    Ok(EigResult { values: std.values, vectors })
}

/// Householder reduction of a symmetric matrix (stored in `v`) to
/// tridiagonal form. On exit `d` holds the diagonal, `e[1..]` the
/// subdiagonal and `v` the accumulated orthogonal transformation.
#[allow(clippy::needless_range_loop)]
fn tridiagonalize(v: &mut Matrix, d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    for j in 0..n {
        d[j] = v[(n - 1, j)];
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for k in 0..i {
            scale += d[k].abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[(i - 1, j)];
                v[(i, j)] = 0.0;
                v[(j, i)] = 0.0;
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for j in 0..i {
                e[j] = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v[(j, i)] = f;
                g = e[j] + v[(j, j)] * f;
                for k in (j + 1)..i {
                    g += v[(k, j)] * d[k];
                    e[k] += v[(k, j)] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[(k, j)] -= f * e[k] + g * d[k];
                }
                d[j] = v[(i - 1, j)];
                v[(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }

    for i in 0..n.saturating_sub(1) {
        v[(n - 1, i)] = v[(i, i)];
        v[(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[(k, i + 1)] * v[(k, j)];
                }
                for k in 0..=i {
                    v[(k, j)] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[(n - 1, j)];
        v[(n - 1, j)] = 0.0;
    }
    v[(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

/// Implicit QL iteration on the tridiagonal matrix `(d, e)`, applying the
/// rotations to the columns of `v`.
fn tridiagonal_ql(v: &mut Matrix, d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m == n {
            m = n - 1;
        }

        if m > l {
            let mut sweeps = 0;
            loop {
                sweeps += 1;
                if sweeps > MAX_QL_SWEEPS {
                    return Err(FateError::NoConvergence(MAX_QL_SWEEPS));
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        h = v[(k, i + 1)];
                        v[(k, i + 1)] = s * v[(k, i)] + c * h;
                        v[(k, i)] = c * v[(k, i)] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}
