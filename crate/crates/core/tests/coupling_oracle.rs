//! Coupling blocks against independently evaluated surface and line
//! integrals on coarse meshes.

use std::f64::consts::PI;

use nalgebra::{Matrix4, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vasotrans_core::coupling::{assemble_exchange_blocks, build_perimeter_average};
use vasotrans_core::fem::{assemble_1d, facet_mass_matrix, Line1d, ScalarField, Term1d};
use vasotrans_core::geometry::{CenterlineGraph, Curve, Radius, VesselGeometry};
use vasotrans_core::mesh::{
    build_line_mesh, build_section_triangulation, extrude, facet, Extrusion, OuterShape, PointLocator, SectionParams, TetMesh,
};
use vasotrans_core::vec3::Vec3;

fn mesh(r: f64) -> TetMesh {
    let sec = build_section_triangulation(&SectionParams::new(0.0, r, OuterShape::Disk(0.5), 2, 12)).unwrap();
    extrude(&sec, &Extrusion::new(1.0, 6)).unwrap()
}

fn random(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

/// P1 value at `p` by brute-force search with a dense barycentric solve.
fn evaluate(mesh: &TetMesh, v: &[f64], p: Vec3) -> f64 {
    for cell in &mesh.cells {
        let x = cell.map(|i| mesh.vertices[i]);
        let m = Matrix4::from_fn(|r, c| if r == 3 { 1.0 } else { x[c][r] });
        let l = m.lu().solve(&Vector4::new(p[0], p[1], p[2], 1.0)).unwrap();
        if l.iter().all(|&w| w > -1e-12) {
            return (0..4).map(|k| l[k] * v[cell[k]]).sum();
        }
    }
    panic!("point {p:?} outside mesh");
}

/// Relative difference between the assembled facet form and the oracle.
pub fn facet_mass_deviation() -> f64 {
    let m = mesh(0.2);
    let xi = 1.7;
    let a = facet_mass_matrix(&m, facet::GAMMA_S, &ScalarField::Constant(xi), 0.0).unwrap();
    let (x, y) = (random(m.num_vertices(), 1), random(m.num_vertices(), 2));
    // edge-midpoint rule, exact for quadratics on triangles
    let mut oracle = 0.0;
    for f in m.facets_with(facet::GAMMA_S) {
        let [i, j, k] = f.vertices;
        let p = [m.vertices[i], m.vertices[j], m.vertices[k]];
        let e1: Vec3 = std::array::from_fn(|d| p[1][d] - p[0][d]);
        let e2: Vec3 = std::array::from_fn(|d| p[2][d] - p[0][d]);
        let cr = [e1[1] * e2[2] - e1[2] * e2[1], e1[2] * e2[0] - e1[0] * e2[2], e1[0] * e2[1] - e1[1] * e2[0]];
        let area = 0.5 * (cr[0] * cr[0] + cr[1] * cr[1] + cr[2] * cr[2]).sqrt();
        for (u, v) in [(i, j), (j, k), (k, i)] {
            oracle += xi * area / 3.0 * (0.5 * (x[u] + x[v])) * (0.5 * (y[u] + y[v]));
        }
    }
    let got = a.bilinear(&x, &y);
    (got - oracle).abs() / oracle.abs().max(1.0)
}

/// Relative difference between the exchange block form and the oracle.
pub fn exchange_blocks_deviation() -> f64 {
    let r = 0.2;
    let m = mesh(r);
    let graph = CenterlineGraph::single(Curve::straight([0.0; 3], [0.0, 0.0, 1.0]).unwrap());
    let lm = build_line_mesh(&graph, 1.0 / 6.0).unwrap();
    let geoms = [VesselGeometry::cylinder(Radius::constant(r))];
    let line = Line1d { graph: &graph, mesh: &lm, geoms: &geoms };
    let xi = ScalarField::Constant(1.3);
    let n_quad = 16;

    let locator = PointLocator::new(&m);
    let pi = build_perimeter_average(&m, &locator, &line, n_quad, 0.0).unwrap();
    let mass = assemble_1d(&line, &[Term1d::Exchange { xi: &xi, w_bar: false }], 0.0).unwrap().remove(0);
    let b = assemble_exchange_blocks(&pi.matrix, &mass, &mass);

    let (n3, n1) = (m.num_vertices(), lm.num_vertices());
    let (xc, xh, yc, yh) = (random(n3, 3), random(n1, 4), random(n3, 5), random(n1, 6));
    let got = b.cc.bilinear(&xc, &yc) + b.c_chat.bilinear(&xc, &yh) + b.chat_c.bilinear(&xh, &yc) + b.chat_chat.bilinear(&xh, &yh);

    // ∫_Λ ξ P (Π̄x − x̂)(Π̄y − ŷ) ds with Π̄ sampled on the circle at each node
    let curve = graph.curve(0);
    let jump = |c: &[f64], h: &[f64]| -> Vec<f64> {
        lm.vertices
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let (center, fr) = (curve.position(v.s), curve.frame(v.s));
                let mean = (0..n_quad)
                    .map(|k| evaluate(&m, c, fr.circle_point(center, r, 2.0 * PI * k as f64 / n_quad as f64)))
                    .sum::<f64>()
                    / n_quad as f64;
                mean - h[i]
            })
            .collect()
    };
    let (gx, gy) = (jump(&xc, &xh), jump(&yc, &yh));
    let weight = 1.3 * 2.0 * PI * r;
    let mut oracle = 0.0;
    for seg in &lm.segments {
        let [a, c] = seg.vertices;
        let h = seg.length();
        oracle += weight * h / 6.0 * (2.0 * gx[a] * gy[a] + gx[a] * gy[c] + gx[c] * gy[a] + 2.0 * gx[c] * gy[c]);
    }
    (got - oracle).abs() / oracle.abs().max(1.0)
}

#[test]
fn interface_facet_mass_matches_midpoint_quadrature() {
    let d = facet_mass_deviation();
    assert!(d <= 1e-8, "{d:e}");
}

#[test]
fn exchange_blocks_match_line_integral_oracle() {
    let d = exchange_blocks_deviation();
    assert!(d <= 1e-8, "{d:e}");
}
