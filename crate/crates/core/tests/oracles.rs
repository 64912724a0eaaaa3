mod support;

use fate_core::dependence::{dep_empirical, dep_of_representation, ConditionSlice, FairnessNotion};
use fate_core::encoder::{build_b, build_c, solve_encoder, EncoderConfig, EncoderProblem};
use fate_core::kernels::{onehot_factor, FactorSource, GramFactor, RffMap};
use fate_core::linalg::{generalized_sym_eig, Matrix};
use fate_core::metrics::{dpv, eod, eood, PredictionSet};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::oracle::{self, Dense};

fn to_dense(m: &Matrix) -> Dense {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

fn gaussian_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
}

fn labels(n: usize, classes: u32, rng: &mut ChaCha8Rng) -> Vec<u32> {
    // Every class present.
    (0..n).map(|i| if (i as u32) < classes { i as u32 } else { rng.random_range(0..classes) }).collect()
}

#[test]
fn generalized_eigenvalues_match_jacobi_reduction() {
    for seed in 0..6 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = 3 + seed as usize * 2;
        let g = gaussian_matrix(m, m, &mut rng);
        let mut b = g.add(&g.transpose()).unwrap();
        b.symmetrize();
        let h = gaussian_matrix(m, m, &mut rng);
        let mut c = h.gram();
        c.add_to_diagonal(0.5);
        let ours = generalized_sym_eig(&b, &c).unwrap().values;
        let reference = oracle::generalized_eigenvalues(&to_dense(&b), &to_dense(&c));
        for (a, r) in ours.iter().zip(&reference) {
            assert!((a - r).abs() <= 1e-9 * r.abs().max(1.0), "seed {seed}: {a} vs {r}");
        }
    }
}

#[test]
fn encoder_matrices_and_optimum_match_dense_construction() {
    for (seed, notion) in [(1, "dp"), (2, "eo"), (3, "eoo"), (4, "eoo")] {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (n, m) = (30, 8);
        let l = gaussian_matrix(n, m, &mut rng);
        let y = labels(n, 3, &mut rng);
        let s = labels(n, 2, &mut rng);
        let factor = GramFactor { factor: l.clone(), source: FactorSource::Linear };
        let config = EncoderConfig { gamma: 1e-3, r: Some(2), ..EncoderConfig::default() };
        let parsed: FairnessNotion = notion.parse().unwrap();
        let lambda = 0.35;
        let problem = EncoderProblem::new(lambda, &config, parsed, &factor, &y, 3, &s, 2);

        let b_ref = oracle::dense_b(&to_dense(&l), &y, 3, &s, 2, notion, lambda);
        let c_ref = oracle::dense_c(&to_dense(&l), 1e-3);
        let b = to_dense(&build_b(&problem).unwrap());
        let c = to_dense(&build_c(&factor, 1e-3).unwrap());
        for i in 0..m {
            for j in 0..m {
                assert!((b[i][j] - b_ref[i][j]).abs() < 1e-13, "{notion} B[{i}][{j}]");
                assert!((c[i][j] - c_ref[i][j]).abs() < 1e-13, "{notion} C[{i}][{j}]");
            }
        }
        let enc = solve_encoder(&problem).unwrap();
        let top: f64 = oracle::generalized_eigenvalues(&b_ref, &c_ref)[..2].iter().sum();
        assert!((enc.objective_value - top).abs() < 1e-10, "{notion}: {} vs {top}", enc.objective_value);
        assert!((oracle::trace_form(&to_dense(&enc.theta), &b_ref) - top).abs() < 1e-9);
    }
}

#[test]
fn dependence_matches_dense_formula_for_rff_factors() {
    for seed in 0..5 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let n = 12;
        let x = gaussian_matrix(n, 3, &mut rng);
        let phi = RffMap::sample(3, 20, 1.3, seed).unwrap().features(&x).unwrap();
        let s = labels(n, 3, &mut rng);
        let theta = gaussian_matrix(2, n, &mut rng);
        let kx = GramFactor { factor: phi.clone(), source: FactorSource::RffFeatures };
        let ours = dep_empirical(&theta, &kx, &onehot_factor(&s, 3).unwrap()).unwrap();
        let pd = to_dense(&phi);
        let k = oracle::matmul(&pd, &oracle::transpose(&pd));
        let reference = oracle::dense_dep(&to_dense(&theta), &k, &oracle::onehot(&s, 3));
        assert!((ours - reference).abs() <= 1e-10 * reference.abs().max(1e-300));
    }
}

#[test]
fn metrics_agree_with_counting_on_random_predictions() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..200 {
        let n = rng.random_range(8..40);
        let y = labels(n, 2, &mut rng);
        let mut s = labels(n, 2, &mut rng);
        // Every (y, s) cell populated.
        s[..4].copy_from_slice(&[0, 1, 1, 0]);
        let y = [&[0, 0, 1, 1][..], &y[4..]].concat();
        let pred: Vec<u32> = (0..n).map(|_| rng.random_range(0..2)).collect();
        let p = PredictionSet::new(pred.clone(), y.clone(), s.clone()).unwrap();
        let (d, e, o) = oracle::counting_metrics(&pred, &y, &s);
        assert!((dpv(&p).unwrap() - d).abs() < 1e-15);
        assert!((eod(&p).unwrap() - e).abs() < 1e-15);
        assert!((eood(&p).unwrap() - o).abs() < 1e-15);
    }
}

proptest! {
    #[test]
    fn representation_dependence_is_permutation_invariant(
        seed in 0u64..1000,
        n in 6usize..30,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z = gaussian_matrix(n, 2, &mut rng);
        let s = labels(n, 2, &mut rng);
        let dep = dep_of_representation(&z, &s, 2, &ConditionSlice::all(n)).unwrap();
        prop_assert!(dep >= 0.0);
        let mut order: Vec<usize> = (0..n).collect();
        order.reverse();
        order.swap(0, n / 2);
        let s_perm: Vec<u32> = order.iter().map(|&i| s[i]).collect();
        let permuted = dep_of_representation(&z.select_rows(&order), &s_perm, 2, &ConditionSlice::all(n)).unwrap();
        prop_assert!((dep - permuted).abs() <= 1e-12 * dep.max(1e-12));
        // Shifting Z by a constant changes nothing.
        let shifted = Matrix::from_fn(n, 2, |i, j| z[(i, j)] + 3.0);
        let moved = dep_of_representation(&shifted, &s, 2, &ConditionSlice::all(n)).unwrap();
        prop_assert!((dep - moved).abs() <= 1e-10 * dep.max(1e-12));
    }

    #[test]
    fn optimum_beats_random_feasible_encoders(seed in 0u64..200, lambda in 0.0f64..0.95) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (n, m) = (20, 5);
        let l = gaussian_matrix(n, m, &mut rng);
        let y = labels(n, 2, &mut rng);
        let s = labels(n, 2, &mut rng);
        let factor = GramFactor { factor: l.clone(), source: FactorSource::Linear };
        let config = EncoderConfig { gamma: 1e-2, r: Some(1), ..EncoderConfig::default() };
        let enc = solve_encoder(&EncoderProblem::new(lambda, &config, FairnessNotion::Dp, &factor, &y, 2, &s, 2)).unwrap();
        let b = oracle::dense_b(&to_dense(&l), &y, 2, &s, 2, "dp", lambda);
        let c = oracle::dense_c(&to_dense(&l), 1e-2);
        let g = to_dense(&gaussian_matrix(1, m, &mut rng));
        let random = oracle::c_orthonormalize(&g, &c);
        prop_assert!(oracle::trace_form(&random, &b) <= enc.objective_value + 1e-10);
    }
}
