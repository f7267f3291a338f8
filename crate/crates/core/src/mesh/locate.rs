use super::TetMesh;
use crate::vec3::{self, Vec3};

/// Barycentric coordinates of `p` in the tetrahedron `t`.
pub fn barycentric(t: &[Vec3; 4], p: Vec3) -> [f64; 4] {
    let (a, b, c, d) = (t[0], t[1], t[2], t[3]);
    let (ab, ac, ad, ap) = (vec3::sub(b, a), vec3::sub(c, a), vec3::sub(d, a), vec3::sub(p, a));
    let det = vec3::det3(ab, ac, ad);
    let l1 = vec3::det3(ap, ac, ad) / det;
    let l2 = vec3::det3(ab, ap, ad) / det;
    let l3 = vec3::det3(ab, ac, ap) / det;
    [1.0 - l1 - l2 - l3, l1, l2, l3]
}

const TOL: f64 = 1e-10;

/// Point location on a tetrahedral mesh through a uniform grid of cell
/// bounding boxes, with a brute-force fallback.
#[derive(Debug, Clone)]
pub struct PointLocator {
    lo: Vec3,
    inv: Vec3,
    dims: [usize; 3],
    start: Vec<usize>,
    items: Vec<usize>,
}

impl PointLocator {
    pub fn new(mesh: &TetMesh) -> PointLocator {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for v in &mesh.vertices {
            for k in 0..3 {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        let ext: Vec3 = std::array::from_fn(|k| (hi[k] - lo[k]).max(1e-300));
        let vol = ext[0] * ext[1] * ext[2];
        let target = (mesh.cells.len() as f64 / 2.0).max(1.0);
        let cell = (vol / target).cbrt();
        let dims: [usize; 3] = std::array::from_fn(|k| ((ext[k] / cell).ceil() as usize).clamp(1, 256));
        let inv: Vec3 = std::array::from_fn(|k| dims[k] as f64 / ext[k]);
        let bin_range = |x: f64, k: usize| -> usize {
            (((x - lo[k]) * inv[k]).floor().max(0.0) as usize).min(dims[k] - 1)
        };
        let nbins = dims[0] * dims[1] * dims[2];
        let mut count = vec![0usize; nbins + 1];
        let mut pairs = Vec::new();
        for (c, cell) in mesh.cells.iter().enumerate() {
            let mut clo = [f64::INFINITY; 3];
            let mut chi = [f64::NEG_INFINITY; 3];
            for &v in cell {
                for k in 0..3 {
                    clo[k] = clo[k].min(mesh.vertices[v][k]);
                    chi[k] = chi[k].max(mesh.vertices[v][k]);
                }
            }
            let pad: Vec3 = std::array::from_fn(|k| 1e-9 * ext[k]);
            let (i0, i1) = (bin_range(clo[0] - pad[0], 0), bin_range(chi[0] + pad[0], 0));
            let (j0, j1) = (bin_range(clo[1] - pad[1], 1), bin_range(chi[1] + pad[1], 1));
            let (k0, k1) = (bin_range(clo[2] - pad[2], 2), bin_range(chi[2] + pad[2], 2));
            for i in i0..=i1 {
                for j in j0..=j1 {
                    for k in k0..=k1 {
                        let b = (i * dims[1] + j) * dims[2] + k;
                        pairs.push((b, c));
                        count[b + 1] += 1;
                    }
                }
            }
        }
        for b in 0..nbins {
            count[b + 1] += count[b];
        }
        let mut fill = count.clone();
        let mut items = vec![0; pairs.len()];
        for (b, c) in pairs {
            items[fill[b]] = c;
            fill[b] += 1;
        }
        PointLocator {
            lo,
            inv,
            dims,
            start: count,
            items,
        }
    }

    fn bin(&self, p: Vec3) -> Option<usize> {
        let mut idx = [0usize; 3];
        for k in 0..3 {
            let x = (p[k] - self.lo[k]) * self.inv[k];
            if x < -1e-6 || x > self.dims[k] as f64 + 1e-6 {
                return None;
            }
            idx[k] = (x.floor().max(0.0) as usize).min(self.dims[k] - 1);
        }
        Some((idx[0] * self.dims[1] + idx[1]) * self.dims[2] + idx[2])
    }

    /// Host cell of `p` and its barycentric coordinates. Among candidate
    /// cells the one with the largest minimal coordinate wins, so points on
    /// shared faces are assigned deterministically.
    pub fn locate(&self, mesh: &TetMesh, p: Vec3) -> Option<(usize, [f64; 4])> {
        let consider = |c: usize, best: &mut Option<(usize, [f64; 4], f64)>| {
            let l = barycentric(&mesh.cell_points(c), p);
            let m = l.iter().cloned().fold(f64::INFINITY, f64::min);
            if best.as_ref().is_none_or(|b| m > b.2) {
                *best = Some((c, l, m));
            }
        };
        let mut best = None;
        if let Some(b) = self.bin(p) {
            for &c in &self.items[self.start[b]..self.start[b + 1]] {
                consider(c, &mut best);
            }
        }
        if best.as_ref().is_none_or(|b| b.2 < -TOL) {
            for c in 0..mesh.cells.len() {
                consider(c, &mut best);
            }
        }
        best.filter(|b| b.2 >= -TOL).map(|(c, l, _)| (c, l))
    }

    /// P1 interpolation of nodal `values` at `p`.
    pub fn interpolate(&self, mesh: &TetMesh, values: &[f64], p: Vec3) -> Option<f64> {
        let (c, l) = self.locate(mesh, p)?;
        Some((0..4).map(|i| l[i] * values[mesh.cells[c][i]]).sum())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::unit_box;

    #[test]
    fn locates_interior_and_rejects_exterior() {
        let m = unit_box(4, 1);
        let loc = PointLocator::new(&m);
        for p in [[0.3, 0.7, 0.2], [0.0, 0.0, 0.0], [1.0, 1.0, 0.5], [0.25, 0.5, 0.75]] {
            let (c, l) = loc.locate(&m, p).unwrap();
            assert!(l.iter().all(|&x| x >= -1e-10));
            let q = (0..4).fold([0.0; 3], |acc, i| vec3::axpy(acc, l[i], m.vertices[m.cells[c][i]]));
            assert!(vec3::dist(p, q) < 1e-12);
        }
        assert!(loc.locate(&m, [1.5, 0.5, 0.5]).is_none());
    }

    #[test]
    fn reproduces_affine_fields() {
        let m = unit_box(3, 1);
        let loc = PointLocator::new(&m);
        let f = |p: Vec3| 1.0 + 2.0 * p[0] - p[1] + 0.5 * p[2];
        let vals: Vec<f64> = m.vertices.iter().map(|&p| f(p)).collect();
        let p = [0.41, 0.13, 0.77];
        assert!((loc.interpolate(&m, &vals, p).unwrap() - f(p)).abs() < 1e-13);
    }
}
