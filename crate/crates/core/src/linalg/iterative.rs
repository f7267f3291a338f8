use super::csr::{dot, norm2};
use super::{CsrMatrix, LinalgError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preconditioner {
    Jacobi,
    #[default]
    Ilu0,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct IterativeOptions {
    pub preconditioner: Preconditioner,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for IterativeOptions {
    fn default() -> Self {
        IterativeOptions {
            preconditioner: Preconditioner::Ilu0,
            tol: 1e-10,
            max_iter: 5000,
        }
    }
}

/// Incomplete LU factorization with the sparsity pattern of the matrix.
#[derive(Debug, Clone)]
pub struct Ilu0 {
    lu: CsrMatrix,
    diag: Vec<usize>,
}

impl Ilu0 {
    pub fn new(a: &CsrMatrix) -> Result<Ilu0, LinalgError> {
        let n = a.nrows();
        let mut lu = a.clone();
        let row_ptr = a.row_ptr().to_vec();
        let col_idx = a.col_idx().to_vec();
        let mut diag = vec![usize::MAX; n];
        for i in 0..n {
            for k in row_ptr[i]..row_ptr[i + 1] {
                if col_idx[k] == i {
                    diag[i] = k;
                }
            }
            if diag[i] == usize::MAX {
                return Err(LinalgError::Singular { index: i });
            }
        }
        let mut pos = vec![usize::MAX; n];
        for i in 0..n {
            for k in row_ptr[i]..row_ptr[i + 1] {
                pos[col_idx[k]] = k;
            }
            let vals = lu.values_mut();
            for kk in row_ptr[i]..row_ptr[i + 1] {
                let k = col_idx[kk];
                if k >= i {
                    break;
                }
                let pivot = vals[diag[k]];
                if pivot == 0.0 {
                    return Err(LinalgError::Singular { index: k });
                }
                vals[kk] /= pivot;
                let lik = vals[kk];
                for m in diag[k] + 1..row_ptr[k + 1] {
                    let j = col_idx[m];
                    if pos[j] != usize::MAX {
                        vals[pos[j]] -= lik * vals[m];
                    }
                }
            }
            for k in row_ptr[i]..row_ptr[i + 1] {
                pos[col_idx[k]] = usize::MAX;
            }
            if vals_is_zero(lu.values()[diag[i]]) {
                return Err(LinalgError::Singular { index: i });
            }
        }
        Ok(Ilu0 { lu, diag })
    }

    pub fn apply(&self, r: &[f64]) -> Vec<f64> {
        let n = r.len();
        let (rp, ci, v) = (self.lu.row_ptr(), self.lu.col_idx(), self.lu.values());
        let mut y = r.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in rp[i]..self.diag[i] {
                s -= v[k] * y[ci[k]];
            }
            y[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in self.diag[i] + 1..rp[i + 1] {
                s -= v[k] * y[ci[k]];
            }
            y[i] = s / v[self.diag[i]];
        }
        y
    }
}

fn vals_is_zero(v: f64) -> bool {
    v == 0.0 || !v.is_finite()
}

enum Precond {
    Jacobi(Vec<f64>),
    Ilu(Ilu0),
}

impl Precond {
    fn apply(&self, r: &[f64]) -> Vec<f64> {
        match self {
            Precond::Jacobi(d) => r.iter().zip(d).map(|(a, b)| a * b).collect(),
            Precond::Ilu(ilu) => ilu.apply(r),
        }
    }
}

/// Right-preconditioned BiCGStab. Returns the solution and the number of
/// iterations once `‖b − Ax‖ ≤ tol ‖b‖`.
pub fn solve_iterative(
    a: &CsrMatrix,
    b: &[f64],
    x0: Option<&[f64]>,
    opts: &IterativeOptions,
) -> Result<(Vec<f64>, usize), LinalgError> {
    let n = b.len();
    if a.nrows() != n || a.ncols() != n {
        return Err(LinalgError::DimensionMismatch("iterative solve".into()));
    }
    let m = match opts.preconditioner {
        Preconditioner::Jacobi => Precond::Jacobi(
            a.diagonal()
                .iter()
                .map(|&d| if d != 0.0 { 1.0 / d } else { 1.0 })
                .collect(),
        ),
        Preconditioner::Ilu0 => Precond::Ilu(Ilu0::new(a)?),
    };
    let bnorm = norm2(b);
    let mut x = x0.map_or_else(|| vec![0.0; n], |x| x.to_vec());
    if bnorm == 0.0 {
        return Ok((vec![0.0; n], 0));
    }
    let ax = a.matvec(&x);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    if norm2(&r) <= opts.tol * bnorm {
        return Ok((x, 0));
    }
    let rhat = r.clone();
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    for it in 1..=opts.max_iter {
        let rho_new = dot(&rhat, &r);
        if rho_new.abs() < 1e-300 {
            return Err(LinalgError::Breakdown { residual: norm2(&r) / bnorm });
        }
        let beta = (rho_new / rho) * (alpha / omega);
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        let phat = m.apply(&p);
        a.matvec_into(&phat, &mut v);
        let denom = dot(&rhat, &v);
        if denom == 0.0 {
            return Err(LinalgError::Breakdown { residual: norm2(&r) / bnorm });
        }
        alpha = rho_new / denom;
        let s: Vec<f64> = r.iter().zip(&v).map(|(ri, vi)| ri - alpha * vi).collect();
        if norm2(&s) <= opts.tol * bnorm {
            x.iter_mut().zip(&phat).for_each(|(xi, pi)| *xi += alpha * pi);
            return Ok((x, it));
        }
        let shat = m.apply(&s);
        let t = a.matvec(&shat);
        let tt = dot(&t, &t);
        if tt == 0.0 {
            return Err(LinalgError::Breakdown { residual: norm2(&s) / bnorm });
        }
        omega = dot(&t, &s) / tt;
        for i in 0..n {
            x[i] += alpha * phat[i] + omega * shat[i];
            r[i] = s[i] - omega * t[i];
        }
        let res = norm2(&r);
        if res <= opts.tol * bnorm {
            return Ok((x, it));
        }
        if omega == 0.0 {
            return Err(LinalgError::Breakdown { residual: res / bnorm });
        }
        rho = rho_new;
    }
    Err(LinalgError::NotConverged {
        iterations: opts.max_iter,
        residual: norm2(&r) / bnorm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{solve_direct, TripletBuilder};

    fn poisson(n: usize) -> CsrMatrix {
        let mut b = TripletBuilder::new(n, n);
        for i in 0..n {
            b.push(i, i, 2.0);
            if i > 0 {
                b.push(i, i - 1, -1.0);
            }
            if i + 1 < n {
                b.push(i, i + 1, -1.0);
            }
        }
        b.build()
    }

    #[test]
    fn diagonal_converges_immediately() {
        let a = CsrMatrix::from_diagonal(&[1.0, 2.0, 4.0, 8.0]);
        let opts = IterativeOptions {
            preconditioner: Preconditioner::Jacobi,
            ..Default::default()
        };
        let (x, it) = solve_iterative(&a, &[1.0, 1.0, 1.0, 1.0], None, &opts).unwrap();
        assert!(it <= 2);
        assert!((x[3] - 0.125).abs() < 1e-14);
    }

    #[test]
    fn poisson_matches_direct() {
        let a = poisson(100);
        let b: Vec<f64> = (0..100).map(|i| (i as f64 * 0.1).sin()).collect();
        let xd = solve_direct(&a, &b).unwrap();
        for pc in [Preconditioner::Jacobi, Preconditioner::Ilu0] {
            let opts = IterativeOptions {
                preconditioner: pc,
                tol: 1e-13,
                max_iter: 2000,
            };
            let (x, _) = solve_iterative(&a, &b, None, &opts).unwrap();
            let err = x.iter().zip(&xd).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            let scale = xd.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            assert!(err <= 1e-8 * scale, "{pc:?}: {err}");
        }
    }

    #[test]
    fn ilu0_exact_for_tridiagonal() {
        let a = poisson(20);
        let ilu = Ilu0::new(&a).unwrap();
        let b = vec![1.0; 20];
        let x = ilu.apply(&b);
        let r = a.matvec(&x);
        assert!(r.iter().all(|v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn iteration_limit_reported() {
        let a = poisson(200);
        let opts = IterativeOptions {
            preconditioner: Preconditioner::Jacobi,
            tol: 1e-14,
            max_iter: 2,
        };
        let err = solve_iterative(&a, &vec![1.0; 200], None, &opts).unwrap_err();
        assert!(matches!(err, LinalgError::NotConverged { iterations: 2, .. }));
    }
}
