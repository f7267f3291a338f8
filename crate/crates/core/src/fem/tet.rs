use super::{FemError, Mat3, ScalarField, TensorField, VectorField};
use crate::linalg::{assemble_parallel, CsrMatrix};
use crate::mesh::{Facet, TetMesh};
use crate::quadrature::{tet_degree2, triangle_degree2};
use crate::vec3::{self, Vec3};

const CHUNK: usize = 2048;

/// Volume (unsigned) and barycentric gradients of a tetrahedron.
pub fn tet_gradients(p: &[Vec3; 4]) -> (f64, [Vec3; 4]) {
    let e1 = vec3::sub(p[1], p[0]);
    let e2 = vec3::sub(p[2], p[0]);
    let e3 = vec3::sub(p[3], p[0]);
    let det = vec3::det3(e1, e2, e3);
    let g1 = vec3::scale(vec3::cross(e2, e3), 1.0 / det);
    let g2 = vec3::scale(vec3::cross(e3, e1), 1.0 / det);
    let g3 = vec3::scale(vec3::cross(e1, e2), 1.0 / det);
    let g0 = vec3::scale(vec3::add(vec3::add(g1, g2), g3), -1.0);
    (det.abs() / 6.0, [g0, g1, g2, g3])
}

fn map_point(p: &[Vec3; 4], l: &[f64; 4]) -> Vec3 {
    std::array::from_fn(|k| l[0] * p[0][k] + l[1] * p[1][k] + l[2] * p[2][k] + l[3] * p[3][k])
}

fn mat_vec(d: &Mat3, g: Vec3) -> Vec3 {
    std::array::from_fn(|i| d[i][0] * g[0] + d[i][1] * g[1] + d[i][2] * g[2])
}

/// Element mass matrix `∫ ρ λ_i λ_j`.
pub fn element_mass(p: &[Vec3; 4], rho: &ScalarField, t: f64) -> [[f64; 4]; 4] {
    let (vol, _) = tet_gradients(p);
    let mut m = [[0.0; 4]; 4];
    match rho.constant_value() {
        Some(r) => {
            for (i, row) in m.iter_mut().enumerate() {
                for (j, v) in row.iter_mut().enumerate() {
                    *v = r * vol / 20.0 * if i == j { 2.0 } else { 1.0 };
                }
            }
        }
        None => {
            for (l, w) in tet_degree2() {
                let r = rho.eval(map_point(p, &l), t) * w * vol;
                for i in 0..4 {
                    for j in 0..4 {
                        m[i][j] += r * l[i] * l[j];
                    }
                }
            }
        }
    }
    m
}

/// Element stiffness matrix `∫ ∇λ_i · D ∇λ_j`.
pub fn element_stiffness(p: &[Vec3; 4], d: &TensorField, t: f64) -> [[f64; 4]; 4] {
    let (vol, g) = tet_gradients(p);
    let dm = match d.constant_value() {
        Some(m) => m,
        None => {
            let mut acc = [[0.0; 3]; 3];
            for (l, w) in tet_degree2() {
                let v = d.eval(map_point(p, &l), t);
                for a in 0..3 {
                    for b in 0..3 {
                        acc[a][b] += w * v[a][b];
                    }
                }
            }
            acc
        }
    };
    let mut k = [[0.0; 4]; 4];
    for j in 0..4 {
        let dg = mat_vec(&dm, g[j]);
        for i in 0..4 {
            k[i][j] = vol * vec3::dot(g[i], dg);
        }
    }
    k
}

/// Element convection matrix `C_ij = −∫ (u λ_j) · ∇λ_i`.
pub fn element_convection(p: &[Vec3; 4], u: &VectorField, t: f64) -> [[f64; 4]; 4] {
    let (vol, g) = tet_gradients(p);
    // ∫ u λ_j for each j
    let mut ul = [[0.0; 3]; 4];
    match u.constant_value() {
        Some(c) => {
            for row in ul.iter_mut() {
                *row = vec3::scale(c, vol / 4.0);
            }
        }
        None => {
            for (l, w) in tet_degree2() {
                let v = u.eval(map_point(p, &l), t);
                for j in 0..4 {
                    ul[j] = vec3::axpy(ul[j], w * vol * l[j], v);
                }
            }
        }
    }
    let mut c = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            c[i][j] = -vec3::dot(ul[j], g[i]);
        }
    }
    c
}

fn in_region(mesh: &TetMesh, c: usize, region: Option<u8>) -> bool {
    region.is_none_or(|r| mesh.regions[c] == r)
}

fn assemble_cells<F>(mesh: &TetMesh, region: Option<u8>, element: F) -> CsrMatrix
where
    F: Fn(&[Vec3; 4]) -> [[f64; 4]; 4] + Sync,
{
    let n = mesh.num_vertices();
    assemble_parallel(n, n, mesh.num_cells(), CHUNK, |c, out| {
        if !in_region(mesh, c, region) {
            return;
        }
        let ke = element(&mesh.cell_points(c));
        let cell = mesh.cells[c];
        for i in 0..4 {
            for j in 0..4 {
                out.push((cell[i], cell[j], ke[i][j]));
            }
        }
    })
}

pub fn mass_matrix(mesh: &TetMesh, region: Option<u8>, rho: &ScalarField, t: f64) -> CsrMatrix {
    assemble_cells(mesh, region, |p| element_mass(p, rho, t))
}

pub fn stiffness_matrix(mesh: &TetMesh, region: Option<u8>, d: &TensorField, t: f64) -> CsrMatrix {
    assemble_cells(mesh, region, |p| element_stiffness(p, d, t))
}

pub fn convection_matrix(mesh: &TetMesh, region: Option<u8>, u: &VectorField, t: f64) -> CsrMatrix {
    assemble_cells(mesh, region, |p| element_convection(p, u, t))
}

/// `∫_F ξ φ_j φ_i dS` over the facets carrying `marker`.
pub fn facet_mass_matrix(mesh: &TetMesh, marker: u8, xi: &ScalarField, t: f64) -> Result<CsrMatrix, FemError> {
    if !mesh.has_marker(marker) {
        return Err(FemError::UnknownMarker(marker));
    }
    let facets: Vec<_> = mesh.facets_with(marker).copied().collect();
    Ok(facet_mass_on(mesh, &facets, xi, t))
}

/// `∫ ξ φ_j φ_i dS` over an explicit facet list.
pub fn facet_mass_on(mesh: &TetMesh, facets: &[Facet], xi: &ScalarField, t: f64) -> CsrMatrix {
    let n = mesh.num_vertices();
    assemble_parallel(n, n, facets.len(), CHUNK, |k, out| {
        let f = &facets[k];
        let area = mesh.facet_area(f);
        let p = f.vertices.map(|v| mesh.vertices[v]);
        let mut me = [[0.0; 3]; 3];
        match xi.constant_value() {
            Some(x) => {
                for (i, row) in me.iter_mut().enumerate() {
                    for (j, v) in row.iter_mut().enumerate() {
                        *v = x * area / 12.0 * if i == j { 2.0 } else { 1.0 };
                    }
                }
            }
            None => {
                for (l, w) in triangle_degree2() {
                    let q: Vec3 = std::array::from_fn(|k| l[0] * p[0][k] + l[1] * p[1][k] + l[2] * p[2][k]);
                    let x = xi.eval(q, t) * w * area;
                    for i in 0..3 {
                        for j in 0..3 {
                            me[i][j] += x * l[i] * l[j];
                        }
                    }
                }
            }
        }
        for i in 0..3 {
            for j in 0..3 {
                out.push((f.vertices[i], f.vertices[j], me[i][j]));
            }
        }
    })
}

/// Load vector `∫ f φ_i` with degree-2 quadrature.
pub fn load_vector(mesh: &TetMesh, region: Option<u8>, f: &ScalarField, t: f64) -> Vec<f64> {
    let mut b = vec![0.0; mesh.num_vertices()];
    if f.is_zero() {
        return b;
    }
    for c in 0..mesh.num_cells() {
        if !in_region(mesh, c, region) {
            continue;
        }
        let p = mesh.cell_points(c);
        let (vol, _) = tet_gradients(&p);
        let cell = mesh.cells[c];
        match f.constant_value() {
            Some(v) => {
                for &i in &cell {
                    b[i] += v * vol / 4.0;
                }
            }
            None => {
                for (l, w) in tet_degree2() {
                    let v = f.eval(map_point(&p, &l), t) * w * vol;
                    for k in 0..4 {
                        b[cell[k]] += v * l[k];
                    }
                }
            }
        }
    }
    b
}

/// Term selector for [`assemble_3d`].
#[derive(Debug, Clone, Copy)]
pub enum Term3d<'a> {
    Mass(&'a ScalarField),
    Stiffness(&'a TensorField),
    Convection(&'a VectorField),
    FacetMass(&'a ScalarField, u8),
}

/// Assembles each requested term on the cells of `region` (all cells when
/// `None`) at time `t`.
pub fn assemble_3d(mesh: &TetMesh, region: Option<u8>, terms: &[Term3d<'_>], t: f64) -> Result<Vec<CsrMatrix>, FemError> {
    if let Some(r) = region {
        if !mesh.regions.contains(&r) {
            return Err(FemError::UnknownRegion(r));
        }
    }
    terms
        .iter()
        .map(|term| match *term {
            Term3d::Mass(rho) => Ok(mass_matrix(mesh, region, rho, t)),
            Term3d::Stiffness(d) => {
                super::check_diffusion(d, mesh, region, t)?;
                Ok(stiffness_matrix(mesh, region, d, t))
            }
            Term3d::Convection(u) => Ok(convection_matrix(mesh, region, u, t)),
            Term3d::FacetMass(xi, marker) => facet_mass_matrix(mesh, marker, xi, t),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::unit_box;

    #[test]
    fn reference_tet_mass() {
        let p = [[0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        let m = element_mass(&p, &ScalarField::Constant(1.0), 0.0);
        let v = 1.0 / 6.0;
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { v / 10.0 } else { v / 20.0 };
                assert!((m[i][j] - expect).abs() < 1e-16);
            }
        }
        let mq = element_mass(&p, &ScalarField::function(|_, _| 1.0, false), 0.0);
        for i in 0..4 {
            for j in 0..4 {
                assert!((mq[i][j] - m[i][j]).abs() < 1e-16);
            }
        }
    }

    #[test]
    fn global_identities() {
        let mesh = unit_box(3, 1);
        let m = mass_matrix(&mesh, None, &ScalarField::Constant(1.0), 0.0);
        assert!((m.total() - 1.0).abs() < 1e-12);
        let k = stiffness_matrix(&mesh, None, &TensorField::isotropic(1.0), 0.0);
        let ones = vec![1.0; mesh.num_vertices()];
        assert!(k.matvec(&ones).iter().all(|v| v.abs() < 1e-12));
        assert!(k.is_symmetric(1e-14) && m.is_symmetric(1e-14));
        // columns of C sum to zero: Σ_i C_ij = −∫ u φ_j · ∇(Σ φ_i) = 0
        let c = convection_matrix(&mesh, None, &VectorField::Constant([0.3, -0.1, 0.2]), 0.0);
        let col = c.transpose().matvec(&ones);
        assert!(col.iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn facet_mass_total_is_area() {
        let mesh = unit_box(2, 1);
        let f = facet_mass_matrix(&mesh, crate::mesh::facet::OUTER_BOUNDARY, &ScalarField::Constant(2.0), 0.0).unwrap();
        assert!((f.total() - 12.0).abs() < 1e-12);
        assert!(facet_mass_matrix(&mesh, 9, &ScalarField::Constant(1.0), 0.0).is_err());
    }
}
