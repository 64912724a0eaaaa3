use super::matrix::Matrix;
use crate::error::{FateError, Result};

/// Relative threshold on `|R_jj|` below which a column counts as dependent.
pub const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct LeastSquares {
    pub solution: Matrix,
    /// `‖Lᵀ·X − V‖_F` at the returned solution.
    pub residual: f64,
}

/// Minimum-norm `X` minimizing `‖Lᵀ·X − V‖_F`, i.e. `X = (Lᵀ)†·V`.
///
/// `L` (n×m) must have full column rank. With the thin QR factorization
/// `L = Q·R`, the system `Rᵀ·Qᵀ·X = V` has minimum-norm solution
/// `X = Q·R⁻ᵀ·V`.
pub fn pinv_apply(l: &Matrix, v: &Matrix) -> Result<LeastSquares> {
    let (n, m) = l.shape();
    if v.rows() != m {
        return Err(FateError::ShapeMismatch(format!("pinv_apply: Lᵀ is {m}x{n} but V has {} rows", v.rows())));
    }
    if m > n {
        return Err(FateError::RankDeficient { rank: n, cols: m });
    }
    let qr = HouseholderQr::new(l);
    let max_r = qr.diag.iter().fold(0.0_f64, |a, d| a.max(d.abs()));
    let rank = qr.diag.iter().filter(|d| d.abs() > RANK_TOL * max_r).count();
    if max_r == 0.0 || rank < m {
        return Err(FateError::RankDeficient { rank: if max_r == 0.0 { 0 } else { rank }, cols: m });
    }

    // Forward substitution with Rᵀ (lower triangular).
    let k = v.cols();
    let mut w = v.clone();
    for c in 0..k {
        for i in 0..m {
            let mut s = w[(i, c)];
            for j in 0..i {
                s -= qr.r(j, i) * w[(j, c)];
            }
            w[(i, c)] = s / qr.diag[i];
        }
    }
    let solution = qr.apply_q(&w);
    let residual = l.t_matmul(&solution)?.sub(v)?.frobenius_norm();
    Ok(LeastSquares { solution, residual })
}

/// Compact Householder QR of a tall matrix.
struct HouseholderQr {
    /// Below the diagonal: Householder vectors; above: the strict upper part of R.
    qr: Matrix,
    diag: Vec<f64>,
}

impl HouseholderQr {
    fn new(a: &Matrix) -> Self {
        let (n, m) = a.shape();
        // Column-major working copy: qr_cols[j] is column j.
        let mut cols: Vec<Vec<f64>> = (0..m).map(|j| a.column(j)).collect();
        let mut diag = vec![0.0; m];
        for k in 0..m {
            let norm = cols[k][k..].iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm != 0.0 {
                let norm = if cols[k][k] < 0.0 { -norm } else { norm };
                for x in &mut cols[k][k..] {
                    *x /= norm;
                }
                cols[k][k] += 1.0;
                let (head, tail) = cols.split_at_mut(k + 1);
                let hk = &head[k];
                for col in tail.iter_mut() {
                    let s: f64 = hk[k..].iter().zip(&col[k..]).map(|(a, b)| a * b).sum();
                    let s = -s / hk[k];
                    for (x, h) in col[k..].iter_mut().zip(&hk[k..]) {
                        *x += s * h;
                    }
                }
                diag[k] = -norm;
            }
        }
        let qr = Matrix::from_fn(n, m, |i, j| cols[j][i]);
        HouseholderQr { qr, diag }
    }

    fn r(&self, i: usize, j: usize) -> f64 {
        if i == j {
            self.diag[i]
        } else {
            self.qr[(i, j)]
        }
    }

    /// `Q·W` for W with `m` rows (thin Q, n×m).
    fn apply_q(&self, w: &Matrix) -> Matrix {
        let (n, m) = self.qr.shape();
        let mut x = Matrix::zeros(n, w.cols());
        for i in 0..m {
            x.row_mut(i).copy_from_slice(w.row(i));
        }
        for k in (0..m).rev() {
            if self.qr[(k, k)] == 0.0 {
                continue;
            }
            for c in 0..w.cols() {
                let mut s = 0.0;
                for i in k..n {
                    s += self.qr[(i, k)] * x[(i, c)];
                }
                let s = -s / self.qr[(k, k)];
                for i in k..n {
                    x[(i, c)] += s * self.qr[(i, k)];
                }
            }
        }
        x
    }
}
