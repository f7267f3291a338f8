use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::csr::dot;
use super::{CsrMatrix, LinalgError, LuFactorization};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenOptions {
    /// Relative change of the Rayleigh quotient at which iteration stops.
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            tol: 1e-10,
            max_iter: 10_000,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<f64>,
    pub iterations: usize,
}

fn start_vector(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn normalize_in(m: &CsrMatrix, x: &mut [f64]) -> f64 {
    let nrm = m.bilinear(x, x).max(0.0).sqrt();
    if nrm > 0.0 {
        x.iter_mut().for_each(|v| *v /= nrm);
    }
    nrm
}

const BLOCK: usize = 4;

/// Smallest eigenvalue of `A u = λ B u` with `B u ≠ 0`, excluding the
/// optional kernel vector. Block shift-invert iteration with Rayleigh-Ritz
/// on `A + σB`; iterates are kept B-orthogonal to the kernel. The
/// eigenvector is B-normalized.
pub fn smallest_nonzero_gevp(
    a: &CsrMatrix,
    b: &CsrMatrix,
    kernel: Option<&[f64]>,
    opts: &EigenOptions,
) -> Result<EigenPair, LinalgError> {
    let n = a.nrows();
    if b.nrows() != n || a.ncols() != n || b.ncols() != n {
        return Err(LinalgError::DimensionMismatch("eigenproblem".into()));
    }
    let z = kernel.map(|k| {
        let mut z = k.to_vec();
        normalize_in(b, &mut z);
        (b.matvec(&z), z)
    });
    let deflate = |x: &mut Vec<f64>| {
        if let Some((bz, z)) = &z {
            let c = dot(bz, x);
            x.iter_mut().zip(z).for_each(|(xi, zi)| *xi -= c * zi);
        }
    };
    let p = BLOCK.min(n.saturating_sub(usize::from(kernel.is_some()))).max(1);
    let mut x = start_block(n, p, opts.seed);
    // A near-zero shift leaves A + σB nearly singular along the kernel, so
    // get a rough estimate first and refactor with a shift proportional to it.
    let sigma0 = 1e-8 * a.trace() / n as f64;
    let rough = EigenOptions {
        tol: opts.tol.max(1e-4),
        ..*opts
    };
    let lu = LuFactorization::new(&a.add(1.0, b, sigma0))?;
    let (est, used) = block_iteration(&lu, b, b, a, false, &mut x, &deflate, &rough, 0)?;
    let (value, iterations) = if rough.tol <= opts.tol {
        (est, used)
    } else {
        let lu = LuFactorization::new(&a.add(1.0, b, 0.1 * est.abs()))?;
        block_iteration(&lu, b, b, a, false, &mut x, &deflate, opts, used)?
    };
    Ok(EigenPair {
        value,
        vector: x.swap_remove(0),
        iterations,
    })
}

/// Largest `μ` of `B u = μ A u` for SPD `A`, by block inverse iteration
/// `X ← A⁻¹ B X` with Rayleigh-Ritz. Returns `λ = 1/μ`, the smallest
/// eigenvalue of `A u = λ B u`, with the eigenvector normalized in the A-norm.
pub fn dominant_inverse_gevp(
    a: &CsrMatrix,
    b: &CsrMatrix,
    opts: &EigenOptions,
) -> Result<EigenPair, LinalgError> {
    let n = a.nrows();
    if b.nrows() != n || a.ncols() != n || b.ncols() != n {
        return Err(LinalgError::DimensionMismatch("eigenproblem".into()));
    }
    let lu = LuFactorization::new(a)?;
    let mut x = start_block(n, BLOCK.min(n), opts.seed);
    let (mu, iterations) = block_iteration(&lu, b, a, b, true, &mut x, &|_| {}, opts, 0)?;
    Ok(EigenPair {
        value: 1.0 / mu,
        vector: x.swap_remove(0),
        iterations,
    })
}

fn start_block(n: usize, p: usize, seed: u64) -> Vec<Vec<f64>> {
    (0..p as u64).map(|j| start_vector(n, seed.wrapping_add(j))).collect()
}

/// Iterates `X ← lu⁻¹ (op X)`, then Rayleigh-Ritz for the pencil
/// (`ritz`, `norm`). On return `x[0]` is the extreme Ritz vector, normalized
/// in `norm`, and the value is its Ritz value.
#[allow(clippy::too_many_arguments)]
fn block_iteration(
    lu: &LuFactorization,
    op: &CsrMatrix,
    norm: &CsrMatrix,
    ritz: &CsrMatrix,
    largest: bool,
    x: &mut Vec<Vec<f64>>,
    deflate: &dyn Fn(&mut Vec<f64>),
    opts: &EigenOptions,
    done: usize,
) -> Result<(f64, usize), LinalgError> {
    let mut theta = f64::NAN;
    for it in done + 1..=opts.max_iter {
        let p = x.len();
        let mut y = Vec::with_capacity(p);
        for xj in x.iter() {
            let mut yj = lu.solve(&op.matvec(xj))?;
            deflate(&mut yj);
            y.push(yj);
        }
        let ny: Vec<_> = y.iter().map(|v| norm.matvec(v)).collect();
        let ry: Vec<_> = y.iter().map(|v| ritz.matvec(v)).collect();
        let g = DMatrix::from_fn(p, p, |i, j| 0.5 * (dot(&y[i], &ny[j]) + dot(&y[j], &ny[i])));
        let h = DMatrix::from_fn(p, p, |i, j| 0.5 * (dot(&y[i], &ry[j]) + dot(&y[j], &ry[i])));
        // Orthonormalize in `norm`, dropping directions the operator annihilates.
        let ge = g.symmetric_eigen();
        let gmax = ge.eigenvalues.max();
        let keep: Vec<usize> = (0..p).filter(|&i| ge.eigenvalues[i] > 1e-12 * gmax).collect();
        if keep.is_empty() {
            return Err(LinalgError::NotConverged {
                iterations: it,
                residual: f64::NAN,
            });
        }
        let t = DMatrix::from_fn(p, keep.len(), |i, j| {
            ge.eigenvectors[(i, keep[j])] / ge.eigenvalues[keep[j]].sqrt()
        });
        let s = t.transpose() * h * &t;
        let eig = ((&s + s.transpose()) * 0.5).symmetric_eigen();
        let p = keep.len();
        let mut order: Vec<usize> = (0..p).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        if largest {
            order.reverse();
        }
        let c = t * &eig.eigenvectors;
        *x = order
            .iter()
            .map(|&k| {
                let mut v = vec![0.0; y[0].len()];
                for (j, yj) in y.iter().enumerate() {
                    let w = c[(j, k)];
                    v.iter_mut().zip(yj).for_each(|(vi, yi)| *vi += w * yi);
                }
                v
            })
            .collect();
        let next = eig.eigenvalues[order[0]];
        if (next - theta).abs() <= opts.tol * next.abs() {
            return Ok((next, it));
        }
        theta = next;
    }
    Err(LinalgError::NotConverged {
        iterations: opts.max_iter,
        residual: theta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::TripletBuilder;

    #[test]
    fn diagonal_pencil() {
        let a = CsrMatrix::from_diagonal(&[0.0, 1.0, 2.0]);
        let b = CsrMatrix::identity(3);
        let e = smallest_nonzero_gevp(&a, &b, Some(&[1.0, 0.0, 0.0]), &EigenOptions::default()).unwrap();
        assert!((e.value - 1.0).abs() < 1e-9);
        assert!(e.vector[0].abs() < 1e-10);
    }

    #[test]
    fn neumann_interval() {
        let n = 200;
        let h = 1.0 / n as f64;
        let mut k = TripletBuilder::new(n + 1, n + 1);
        let mut m = TripletBuilder::new(n + 1, n + 1);
        for e in 0..n {
            for (i, j) in [(e, e), (e + 1, e + 1)] {
                k.push(i, j, 1.0 / h);
                m.push(i, j, h / 3.0);
            }
            for (i, j) in [(e, e + 1), (e + 1, e)] {
                k.push(i, j, -1.0 / h);
                m.push(i, j, h / 6.0);
            }
        }
        let (k, m) = (k.build(), m.build());
        let ones = vec![1.0; n + 1];
        let e = smallest_nonzero_gevp(&k, &m, Some(&ones), &EigenOptions::default()).unwrap();
        let pi2 = std::f64::consts::PI.powi(2);
        assert!((e.value - pi2).abs() < 1e-3 * pi2, "{}", e.value);
        let orth = dot(&m.matvec(&ones), &e.vector);
        assert!(orth.abs() < 1e-10);
    }

    #[test]
    fn dominant_inverse_on_diagonal() {
        let a = CsrMatrix::from_diagonal(&[2.0, 4.0, 1.0]);
        let b = CsrMatrix::from_diagonal(&[1.0, 0.0, 0.25]);
        let e = dominant_inverse_gevp(&a, &b, &EigenOptions::default()).unwrap();
        // μ = 1/2 and 1/4; λ = 2
        assert!((e.value - 2.0).abs() < 1e-9);
    }
}
