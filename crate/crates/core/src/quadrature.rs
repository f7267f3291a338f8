//! Quadrature rules on reference cells and intervals.

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Gauss-Legendre rule mapped to [a, b].
pub fn gauss_interval(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(n);
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    x.iter().zip(&w).map(|(&xi, &wi)| (mid + half * xi, half * wi)).collect()
}

/// Degree-2 rule on the reference tetrahedron: barycentric points and
/// weights summing to one.
pub fn tet_degree2() -> [([f64; 4], f64); 4] {
    const A: f64 = 0.5854101966249685;
    const B: f64 = 0.1381966011250105;
    [
        ([A, B, B, B], 0.25),
        ([B, A, B, B], 0.25),
        ([B, B, A, B], 0.25),
        ([B, B, B, A], 0.25),
    ]
}

/// Degree-2 rule on the reference triangle (barycentric, weights sum to one).
pub fn triangle_degree2() -> [([f64; 3], f64); 3] {
    const A: f64 = 2.0 / 3.0;
    const B: f64 = 1.0 / 6.0;
    [([A, B, B], 1.0 / 3.0), ([B, A, B], 1.0 / 3.0), ([B, B, A], 1.0 / 3.0)]
}

/// Adaptive Simpson integration of `f` over [a, b].
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn rec<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 50)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_integrates_polynomials() {
        for n in 1..=8 {
            let rule = gauss_interval(n, 0.0, 2.0);
            for k in 0..2 * n {
                let q: f64 = rule.iter().map(|(x, w)| w * x.powi(k as i32)).sum();
                let exact = 2f64.powi(k as i32 + 1) / (k as f64 + 1.0);
                assert!((q - exact).abs() < 1e-12 * exact.max(1.0), "n={n} k={k}");
            }
        }
    }

    #[test]
    fn tet_rule_degree_two() {
        // ∫ λ0^2 over the reference tet = 2 V / 20 with V = 1/6, i.e. mean 1/10
        let mean: f64 = tet_degree2().iter().map(|(l, w)| w * l[0] * l[0]).sum();
        assert!((mean - 0.1).abs() < 1e-15);
        let mean: f64 = tet_degree2().iter().map(|(l, w)| w * l[0] * l[1]).sum();
        assert!((mean - 0.05).abs() < 1e-15);
    }

    #[test]
    fn simpson_matches_closed_form() {
        let v = adaptive_simpson(&|x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-13);
        assert!((v - 2.0).abs() < 1e-11);
    }
}
