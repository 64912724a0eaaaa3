//! Dense reference implementations on plain row-major `Vec<Vec<f64>>`.
//! Nothing here calls into the library's linear algebra.
#![allow(dead_code, clippy::needless_range_loop)]

pub type Dense = Vec<Vec<f64>>;

pub fn zeros(rows: usize, cols: usize) -> Dense {
    vec![vec![0.0; cols]; rows]
}

pub fn identity(n: usize) -> Dense {
    let mut m = zeros(n, n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    m
}

pub fn transpose(a: &Dense) -> Dense {
    let cols = a.first().map_or(0, Vec::len);
    (0..cols).map(|j| a.iter().map(|row| row[j]).collect()).collect()
}

pub fn matmul(a: &Dense, b: &Dense) -> Dense {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            assert_eq!(row.len(), inner);
            (0..cols).map(|j| (0..inner).map(|k| row[k] * b[k][j]).sum()).collect()
        })
        .collect()
}

pub fn scale(a: &Dense, alpha: f64) -> Dense {
    a.iter().map(|row| row.iter().map(|v| alpha * v).collect()).collect()
}

pub fn add(a: &Dense, b: &Dense) -> Dense {
    a.iter().zip(b).map(|(x, y)| x.iter().zip(y).map(|(u, v)| u + v).collect()).collect()
}

pub fn trace(a: &Dense) -> f64 {
    (0..a.len()).map(|i| a[i][i]).sum()
}

pub fn frobenius_sq(a: &Dense) -> f64 {
    a.iter().flatten().map(|v| v * v).sum()
}

/// `I − (1/n)·11ᵀ`.
pub fn centering(n: usize) -> Dense {
    let mut h = identity(n);
    for row in &mut h {
        for v in row.iter_mut() {
            *v -= 1.0 / n as f64;
        }
    }
    h
}

pub fn onehot(labels: &[u32], classes: usize) -> Dense {
    labels.iter().map(|&l| (0..classes).map(|k| if k == l as usize { 1.0 } else { 0.0 }).collect()).collect()
}

pub fn select_rows(a: &Dense, rows: &[usize]) -> Dense {
    rows.iter().map(|&i| a[i].clone()).collect()
}

/// Cyclic Jacobi eigensolver for a symmetric matrix. Eigenvalues descending,
/// eigenvectors as columns.
pub fn jacobi_eigen(a: &Dense) -> (Vec<f64>, Dense) {
    let n = a.len();
    let mut m = a.clone();
    let mut v = identity(n);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i][j] * m[i][j])
            .sum();
        let total: f64 = frobenius_sq(&m);
        if off <= 1e-30 * total.max(1e-300) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k][p], m[k][q]);
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p][k], m[q][k]);
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[j][j].total_cmp(&m[i][i]));
    let values = order.iter().map(|&i| m[i][i]).collect();
    let vectors = (0..n).map(|r| order.iter().map(|&i| v[r][i]).collect()).collect();
    (values, vectors)
}

/// `f(A)` for symmetric `A` through its eigendecomposition.
pub fn spectral_map(a: &Dense, f: impl Fn(f64) -> f64) -> Dense {
    let (values, vectors) = jacobi_eigen(a);
    let n = a.len();
    let mut out = zeros(n, n);
    for (k, &lam) in values.iter().enumerate() {
        let fl = f(lam);
        for i in 0..n {
            for j in 0..n {
                out[i][j] += vectors[i][k] * fl * vectors[j][k];
            }
        }
    }
    out
}

/// Generalized eigenvalues of `B·u = τ·C·u` (C positive definite), descending,
/// via the symmetric reduction `C^{-1/2}·B·C^{-1/2}`.
pub fn generalized_eigenvalues(b: &Dense, c: &Dense) -> Vec<f64> {
    let c_inv_sqrt = spectral_map(c, |v| 1.0 / v.sqrt());
    let mut reduced = matmul(&matmul(&c_inv_sqrt, b), &c_inv_sqrt);
    symmetrize(&mut reduced);
    jacobi_eigen(&reduced).0
}

pub fn symmetrize(a: &mut Dense) {
    let n = a.len();
    for i in 0..n {
        for j in i + 1..n {
            let m = 0.5 * (a[i][j] + a[j][i]);
            a[i][j] = m;
            a[j][i] = m;
        }
    }
}

/// Row sets of the conditional slices: all rows (DP), `y = 1` (EO), each
/// class (EOO).
pub fn slices(y: &[u32], classes: usize, notion: &str) -> Vec<Vec<usize>> {
    let rows_of = |c: u32| (0..y.len()).filter(|&i| y[i] == c).collect::<Vec<_>>();
    match notion {
        "dp" => vec![(0..y.len()).collect()],
        "eo" => vec![rows_of(1)],
        "eoo" => (0..classes as u32).map(rows_of).collect(),
        other => panic!("unknown notion {other}"),
    }
}

/// `(1/n²)·Lᵀ·H·K_A·H·L` with the delta kernel `K_A = A·Aᵀ` on one-hot labels.
pub fn label_cross(l: &Dense, labels: &[u32], classes: usize) -> Dense {
    let n = l.len();
    let a = onehot(labels, classes);
    let k = matmul(&a, &transpose(&a));
    let h = centering(n);
    let lt = transpose(l);
    let inner = matmul(&matmul(&h, &k), &h);
    scale(&matmul(&matmul(&lt, &inner), l), 1.0 / (n * n) as f64)
}

/// Utility-minus-fairness matrix of the trace objective.
pub fn dense_b(l: &Dense, y: &[u32], cy: usize, s: &[u32], cs: usize, notion: &str, lambda: f64) -> Dense {
    let mut b = scale(&label_cross(l, y, cy), 1.0 - lambda);
    for rows in slices(y, cy, notion) {
        let ls = select_rows(l, &rows);
        let ss: Vec<u32> = rows.iter().map(|&i| s[i]).collect();
        b = add(&b, &scale(&label_cross(&ls, &ss, cs), -lambda));
    }
    b
}

/// `(1/n)·Lᵀ·H·L + γ·I`.
pub fn dense_c(l: &Dense, gamma: f64) -> Dense {
    let n = l.len();
    let lt = transpose(l);
    let c = scale(&matmul(&matmul(&lt, &centering(n)), l), 1.0 / n as f64);
    add(&c, &scale(&identity(lt.len()), gamma))
}

/// `(1/n²)·‖Θ·K·H·L_A‖²_F`.
pub fn dense_dep(theta: &Dense, k: &Dense, l_a: &Dense) -> f64 {
    let n = k.len();
    let prod = matmul(&matmul(&matmul(theta, k), &centering(n)), l_a);
    frobenius_sq(&prod) / (n * n) as f64
}

/// `tr(Θ·B·Θᵀ)`.
pub fn trace_form(theta: &Dense, b: &Dense) -> f64 {
    trace(&matmul(&matmul(theta, b), &transpose(theta)))
}

/// Rescales the rows of `g` (r×m) so that `Θ·C·Θᵀ = I`.
pub fn c_orthonormalize(g: &Dense, c: &Dense) -> Dense {
    let gram = matmul(&matmul(g, c), &transpose(g));
    matmul(&spectral_map(&gram, |v| 1.0 / v.sqrt()), g)
}

/// Fairness gaps by direct counting over binary predictions: `(DPV, EOD, EOOD)`.
pub fn counting_metrics(pred: &[u32], y: &[u32], s: &[u32]) -> (f64, f64, f64) {
    let rate = |cond: &dyn Fn(usize) -> bool| {
        let (mut hits, mut total) = (0usize, 0usize);
        for i in 0..pred.len() {
            if cond(i) {
                total += 1;
                hits += (pred[i] == 1) as usize;
            }
        }
        hits as f64 / total as f64
    };
    let dpv = (rate(&|i| s[i] == 0) - rate(&|i| s[i] == 1)).abs();
    let gap = |c: u32| (rate(&|i| y[i] == c && s[i] == 0) - rate(&|i| y[i] == c && s[i] == 1)).abs();
    (dpv, gap(1), 0.5 * (gap(0) + gap(1)))
}
