//! Operators bridging the 3D mesh and the centerline mesh.

use thiserror::Error;

use crate::fem::{FemError, Line1d};
use crate::geometry::{section_rule, CenterlineGraph, GeometryError};
use crate::linalg::{CsrMatrix, TripletBuilder};
use crate::mesh::{LineMesh, PointLocator, TetMesh};
use crate::vec3::Vec3;

#[derive(Debug, Error)]
pub enum CouplingError {
    #[error("quadrature point {0:?} lies outside the 3D mesh")]
    OutsideMesh(Vec3),
    #[error("need at least 8 circle points, got {0}")]
    TooFewPoints(usize),
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Averaging operator from 3D nodal values to 1D nodal values.
#[derive(Debug, Clone)]
pub struct AverageOperator {
    pub matrix: CsrMatrix,
    /// Radius of the sampled circle (or outer radius of the section) per 1D node.
    pub radii: Vec<f64>,
    /// Host cell of every quadrature point, grouped by 1D node.
    pub hosts: Vec<Vec<usize>>,
    pub points_per_node: usize,
}

impl AverageOperator {
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        self.matrix.matvec(v)
    }
}

/// Number of circle points used when none is requested.
pub fn default_circle_points(r2: f64, h_min: f64) -> usize {
    8usize.max((2.0 * std::f64::consts::PI * r2 / h_min).ceil() as usize)
}

fn build_average<F>(mesh: &TetMesh, line: &Line1d<'_>, locator: &PointLocator, t: f64, rule: F) -> Result<AverageOperator, CouplingError>
where
    F: Fn(f64, f64) -> Vec<(f64, f64, f64)>,
{
    let n1 = line.mesh.num_vertices();
    let mut b = TripletBuilder::new(n1, mesh.num_vertices());
    let mut radii = Vec::with_capacity(n1);
    let mut hosts = Vec::with_capacity(n1);
    let mut per_node = 0;
    for (i, v) in line.mesh.vertices.iter().enumerate() {
        let (r1, r2) = line.geometry(v.curve).radii(v.s, t)?;
        let curve = line.graph.curve(v.curve);
        let (center, frame) = (curve.position(v.s), curve.frame(v.s));
        let pts = rule(r1, r2);
        per_node = pts.len();
        let mut host = Vec::with_capacity(pts.len());
        for (r, th, w) in pts {
            let p = frame.circle_point(center, r, th);
            let (cell, bary) = locator.locate(mesh, p).ok_or(CouplingError::OutsideMesh(p))?;
            for (k, &vtx) in mesh.cells[cell].iter().enumerate() {
                b.push(i, vtx, w * bary[k]);
            }
            host.push(cell);
        }
        radii.push(r2);
        hosts.push(host);
    }
    Ok(AverageOperator { matrix: b.build(), radii, hosts, points_per_node: per_node })
}

/// Perimeter average over the outer circle of each section, sampled at
/// `n_quad` equispaced points.
pub fn build_perimeter_average(
    mesh: &TetMesh,
    locator: &PointLocator,
    line: &Line1d<'_>,
    n_quad: usize,
    t: f64,
) -> Result<AverageOperator, CouplingError> {
    if n_quad < 8 {
        return Err(CouplingError::TooFewPoints(n_quad));
    }
    let step = 2.0 * std::f64::consts::PI / n_quad as f64;
    let w = 1.0 / n_quad as f64;
    build_average(mesh, line, locator, t, |_, r2| (0..n_quad).map(|k| (r2, k as f64 * step, w)).collect())
}

/// Cross-section average using `n_r` radial Gauss points and `n_theta` angles.
pub fn build_section_average(
    mesh: &TetMesh,
    locator: &PointLocator,
    line: &Line1d<'_>,
    n_r: usize,
    n_theta: usize,
    t: f64,
) -> Result<AverageOperator, CouplingError> {
    build_average(mesh, line, locator, t, |r1, r2| section_rule(r1, r2, n_r, n_theta))
}

/// Uniform-in-section extension of a 1D field: each point takes the value at
/// its closest centerline point.
pub fn extend_1d_to_3d(graph: &CenterlineGraph, line: &LineMesh, values: &[f64], points: &[Vec3]) -> Vec<f64> {
    points
        .iter()
        .map(|&p| {
            let (c, s, _) = graph.project(p);
            line.interpolate(values, c, s)
        })
        .collect()
}

/// Exchange blocks of the 3D-1D coupling.
#[derive(Debug, Clone)]
pub struct ExchangeBlocks {
    pub cc: CsrMatrix,
    pub c_chat: CsrMatrix,
    pub chat_c: CsrMatrix,
    pub chat_chat: CsrMatrix,
}

/// Builds the blocks from the perimeter average `pi`, the 1D mass `m_xp`
/// weighted by ξP, and the same mass additionally weighted by w̄_c.
pub fn assemble_exchange_blocks(pi: &CsrMatrix, m_xp: &CsrMatrix, m_xpw: &CsrMatrix) -> ExchangeBlocks {
    let pit = pi.transpose();
    // mass matrices are symmetric, so M Π = (Πᵀ M)ᵀ
    let pit_m = pit.matmul(m_xp);
    let c_chat = if m_xpw == m_xp { pit_m.scale(-1.0) } else { pit.matmul(m_xpw).scale(-1.0) };
    ExchangeBlocks {
        cc: pit_m.matmul(pi),
        chat_c: pit_m.transpose().scale(-1.0),
        c_chat,
        chat_chat: m_xpw.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Curve, Radius, VesselGeometry};
    use crate::mesh::{build_line_mesh, build_section_triangulation, extrude, Axis, Extrusion, OuterShape, SectionParams};

    fn setup(r: f64) -> (TetMesh, CenterlineGraph, LineMesh, Vec<VesselGeometry>) {
        let sec = build_section_triangulation(&SectionParams::new(0.0, r, OuterShape::Disk(0.5), 3, 16)).unwrap();
        let mesh = extrude(&sec, &Extrusion::new(1.0, 5).along(Axis::Z, [0.0; 3])).unwrap();
        let g = CenterlineGraph::single(Curve::straight([0.0; 3], [0.0, 0.0, 1.0]).unwrap());
        let lm = build_line_mesh(&g, 0.2).unwrap();
        (mesh, g, lm, vec![VesselGeometry::cylinder(Radius::constant(r))])
    }

    #[test]
    fn averages_of_affine_and_quadratic_fields() {
        let (mesh, g, lm, geoms) = setup(0.2);
        let line = Line1d { graph: &g, mesh: &lm, geoms: &geoms };
        let loc = PointLocator::new(&mesh);
        let pi = build_perimeter_average(&mesh, &loc, &line, 16, 0.0).unwrap();
        assert!(pi.matrix.row_sums().iter().all(|s| (s - 1.0).abs() < 1e-12));
        let affine: Vec<f64> = mesh.vertices.iter().map(|p| 2.0 * p[0] - p[1] + 3.0 * p[2] + 1.0).collect();
        for (i, v) in pi.apply(&affine).iter().enumerate() {
            assert!((v - (3.0 * lm.vertices[i].point[2] + 1.0)).abs() < 1e-12);
        }
        let sa = build_section_average(&mesh, &loc, &line, 3, 16, 0.0).unwrap();
        assert!(sa.matrix.row_sums().iter().all(|s| (s - 1.0).abs() < 1e-12));
    }

    #[test]
    fn exchange_energy_is_a_square() {
        let (mesh, g, lm, geoms) = setup(0.2);
        let line = Line1d { graph: &g, mesh: &lm, geoms: &geoms };
        let loc = PointLocator::new(&mesh);
        let pi = build_perimeter_average(&mesh, &loc, &line, 16, 0.0).unwrap();
        let xi = crate::fem::ScalarField::Constant(1.0);
        let m = crate::fem::assemble_1d(&line, &[crate::fem::Term1d::Exchange { xi: &xi, w_bar: false }], 0.0)
            .unwrap()
            .remove(0);
        let b = assemble_exchange_blocks(&pi.matrix, &m, &m);
        assert_eq!(b.c_chat.transpose(), b.chat_c);
        let c: Vec<f64> = mesh.vertices.iter().map(|p| p[0] * p[0] + p[2]).collect();
        let ch: Vec<f64> = lm.vertices.iter().map(|v| v.s.sin()).collect();
        let e = b.cc.bilinear(&c, &c) + 2.0 * b.c_chat.bilinear(&c, &ch) + b.chat_chat.bilinear(&ch, &ch);
        let d: Vec<f64> = pi.apply(&c).iter().zip(&ch).map(|(a, b)| a - b).collect();
        assert!((e - m.bilinear(&d, &d)).abs() < 1e-12);
    }

    #[test]
    fn extension_is_constant_on_sections() {
        let (_, g, lm, _) = setup(0.2);
        let vals: Vec<f64> = lm.vertices.iter().map(|v| v.s).collect();
        let pts = vec![[0.1, 0.05, 0.3], [-0.2, 0.0, 0.3], [0.0, 0.0, 0.7]];
        let e = extend_1d_to_3d(&g, &lm, &vals, &pts);
        assert!((e[0] - 0.3).abs() < 1e-14 && (e[1] - 0.3).abs() < 1e-14 && (e[2] - 0.7).abs() < 1e-14);
    }
}
