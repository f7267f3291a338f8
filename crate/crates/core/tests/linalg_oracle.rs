use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vasotrans_core::linalg::{solve_direct, solve_iterative, CsrMatrix, IterativeOptions, LuFactorization, Preconditioner};

/// Random sparse SPD matrix: a sparse B, then BᵀB + n·I.
fn random_spd(n: usize, seed: u64) -> (CsrMatrix, DMatrix<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        b[(i, i)] = rng.random_range(0.5..2.0);
        for _ in 0..3 {
            let j = rng.random_range(0..n);
            b[(i, j)] += rng.random_range(-1.0..1.0);
        }
    }
    let a = b.transpose() * &b + DMatrix::<f64>::identity(n, n) * 0.1 * n as f64;
    let rows: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| a[(i, j)]).collect()).collect();
    (CsrMatrix::from_dense(&rows), a)
}

fn rhs(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn max_rel_diff(x: &[f64], y: &DVector<f64>) -> f64 {
    let scale = y.amax();
    x.iter().zip(y.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / scale
}

#[test]
fn random_spd_200_matches_dense_oracle() {
    let n = 200;
    let (a, dense) = random_spd(n, 7);
    let b = rhs(n, 8);
    let oracle = dense.clone().cholesky().expect("spd").solve(&DVector::from_vec(b.clone()));

    let x = solve_direct(&a, &b).unwrap();
    assert!(max_rel_diff(&x, &oracle) < 1e-10, "direct: {}", max_rel_diff(&x, &oracle));

    for pc in [Preconditioner::Jacobi, Preconditioner::Ilu0] {
        let opts = IterativeOptions { tol: 1e-12, preconditioner: pc, ..IterativeOptions::default() };
        let (x, _) = solve_iterative(&a, &b, None, &opts).unwrap();
        assert!(max_rel_diff(&x, &oracle) < 1e-8, "{pc:?}: {}", max_rel_diff(&x, &oracle));
    }
}

#[test]
fn transpose_solve_matches_dense_oracle() {
    let n = 60;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 10.0 } else if rng.random_bool(0.1) { rng.random_range(-1.0..1.0) } else { 0.0 }).collect())
        .collect();
    let a = CsrMatrix::from_dense(&rows);
    let dense = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
    let c = rhs(n, 4);
    let lu = LuFactorization::new(&a).unwrap();
    let y = lu.solve_transpose(&c).unwrap();
    let oracle = dense.transpose().lu().solve(&DVector::from_vec(c)).unwrap();
    assert!(max_rel_diff(&y, &oracle) < 1e-12);
}
