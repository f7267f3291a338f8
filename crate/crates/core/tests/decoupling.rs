//! With a vanishing exchange coefficient the coupled models split into
//! independent sub-models.

use vasotrans_core::fem::{Line1d, ScalarField};
use vasotrans_core::geometry::{CenterlineGraph, Curve, Radius, VesselGeometry};
use vasotrans_core::mesh::{build_line_mesh, facet, region, unit_box, LineMesh, TetMesh};
use vasotrans_core::models::*;

pub const TOL: f64 = 1e-10;

fn setup() -> (TetMesh, CenterlineGraph, LineMesh) {
    let m = unit_box(6, region::SURROUNDINGS);
    let g = CenterlineGraph::single(Curve::straight([0.5, 0.5, 0.0], [0.5, 0.5, 1.0]).unwrap());
    let lm = build_line_mesh(&g, 0.1).unwrap();
    (m, g, lm)
}

fn tissue() -> Physics {
    Physics {
        initial: ScalarField::function(|x, _| x[0] * (1.0 - x[0]) + 0.5 * x[2], false),
        ..Physics::new(0.7, [0.1, 0.0, 0.2], 0.5, 0.0)
    }
}

fn vessel() -> LinePhysics {
    LinePhysics {
        initial: ScalarField::function(|x, _| 1.0 - 0.5 * x[2], false),
        ..LinePhysics::new(1.0, [0.0, 0.0, 0.4], 0.3, 0.0)
    }
}

fn pvs() -> LinePhysics {
    LinePhysics::new(0.8, [0.0, 0.0, 0.1], 0.2, 0.5)
}

const TIME: TimeGrid = TimeGrid { tau: 0.02, t_end: 0.2 };

fn standalone_tissue(m: &TetMesh) -> Vec<Vec<f64>> {
    let sol = solve_reference_multidomain(&ReferenceProblem {
        mesh: m,
        regions: vec![ReferenceRegion { region: region::SURROUNDINGS, name: "c".into(), physics: tissue() }],
        interfaces: vec![],
        dirichlet: vec![facet::OUTER_BOUNDARY],
        time: TIME,
        solver: SolverOptions::default(),
    })
    .unwrap();
    // back to parent numbering
    let map = sol.submeshes[0].vertex_parent.clone().unwrap();
    sol.solution
        .states
        .iter()
        .map(|s| {
            let mut v = vec![0.0; m.num_vertices()];
            for (local, &g) in map.iter().enumerate() {
                v[g] = s[0][local];
            }
            v
        })
        .collect()
}

fn standalone_line(g: &CenterlineGraph, lm: &LineMesh, geom: VesselGeometry, phys: LinePhysics) -> Vec<Vec<f64>> {
    let geoms = [geom];
    let sol = solve_1d_network(&NetworkProblem {
        line: Line1d { graph: g, mesh: lm, geoms: &geoms },
        physics: phys,
        exterior: None,
        dirichlet: vec![],
        time: TIME,
        time_derivative: TimeDerivative::Conservative,
        solver: SolverOptions::default(),
    })
    .unwrap();
    sol.states.into_iter().map(|mut s| s.remove(0)).collect()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Largest difference between the uncoupled 3D-1D run and its standalone parts.
pub fn zero_exchange_3d1d_difference() -> f64 {
    let (m, g, lm) = setup();
    let geoms = [VesselGeometry::cylinder(Radius::constant(0.1))];
    let sol = solve_3d1d(&Coupled3d1d {
        mesh: &m,
        tissue: tissue(),
        line: Line1d { graph: &g, mesh: &lm, geoms: &geoms },
        vessel: vessel(),
        xi: ScalarField::Constant(0.0),
        dirichlet: vec![facet::OUTER_BOUNDARY],
        time: TIME,
        n_quad: Some(16),
        time_derivative: TimeDerivative::Conservative,
        solver: SolverOptions::default(),
    })
    .unwrap();
    let c3 = standalone_tissue(&m);
    let c1 = standalone_line(&g, &lm, geoms[0].clone(), vessel());
    (0..sol.states.len())
        .map(|n| max_diff(sol.at(n, "c").unwrap(), &c3[n]).max(max_diff(sol.at(n, "chat").unwrap(), &c1[n])))
        .fold(0.0, f64::max)
}

/// Largest difference between 3D-1D-1D with a closed vessel wall and 3D-1D plus a standalone vessel.
pub fn zero_wall_exchange_difference() -> f64 {
    let (m, g, lm) = setup();
    let (r1, r2) = (0.08, 0.16);
    let vessel_geom = VesselGeometry::cylinder(Radius::constant(r1));
    let pvs_geom = VesselGeometry::annulus(Radius::constant(r1), Radius::constant(r2));
    let xi_s = ScalarField::Constant(1.5);
    let full = solve_3d1d1d(&Coupled3d1d1d {
        mesh: &m,
        tissue: tissue(),
        graph: &g,
        line_mesh: &lm,
        vessel_geometry: vec![vessel_geom.clone()],
        pvs_geometry: vec![pvs_geom.clone()],
        vessel: vessel(),
        pvs: pvs(),
        xi_v: ScalarField::Constant(0.0),
        xi_s: xi_s.clone(),
        dirichlet: vec![facet::OUTER_BOUNDARY],
        time: TIME,
        n_quad: Some(16),
        time_derivative: TimeDerivative::Conservative,
        solver: SolverOptions::default(),
    })
    .unwrap();
    let pvs_geoms = [pvs_geom];
    let reduced = solve_3d1d(&Coupled3d1d {
        mesh: &m,
        tissue: tissue(),
        line: Line1d { graph: &g, mesh: &lm, geoms: &pvs_geoms },
        vessel: pvs(),
        xi: xi_s,
        dirichlet: vec![facet::OUTER_BOUNDARY],
        time: TIME,
        n_quad: Some(16),
        time_derivative: TimeDerivative::Conservative,
        solver: SolverOptions::default(),
    })
    .unwrap();
    let v = standalone_line(&g, &lm, vessel_geom, vessel());
    (0..full.states.len())
        .map(|n| {
            max_diff(full.at(n, "c").unwrap(), reduced.at(n, "c").unwrap())
                .max(max_diff(full.at(n, "chat_p").unwrap(), reduced.at(n, "chat").unwrap()))
                .max(max_diff(full.at(n, "chat_v").unwrap(), &v[n]))
        })
        .fold(0.0, f64::max)
}

#[test]
fn zero_exchange_3d1d_splits() {
    let d = zero_exchange_3d1d_difference();
    assert!(d < TOL, "{d:e}");
}

#[test]
fn zero_wall_exchange_3d1d1d_reduces_to_3d1d_plus_vessel() {
    let d = zero_wall_exchange_difference();
    assert!(d < TOL, "{d:e}");
}
