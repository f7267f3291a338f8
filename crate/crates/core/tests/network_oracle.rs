//! Steady transport on a three-edge Y network against a dense
//! finite-difference oracle in flux-balance form.

use nalgebra::{DMatrix, DVector};
use vasotrans_core::fem::Line1d;
use vasotrans_core::geometry::load_network;
use vasotrans_core::mesh::build_line_mesh;
use vasotrans_core::models::{solve_1d_steady, LinePhysics, NetworkProblem, SolverOptions, TimeDerivative, TimeGrid};

const Y: &str = r#"{
    "curves": [
        {"points": [[0,0,0],[1,0,0]], "radius": {"profile": "constant", "r": 0.1}},
        {"points": [[1,0,0],[1.3,0.4,0]], "radius": {"profile": "constant", "r": 0.07}},
        {"points": [[1,0,0],[1.45,-0.6,0]], "radius": {"profile": "constant", "r": 0.05}}
    ],
    "junctions": [[[0, "end"], [1, "start"], [2, "start"]]],
    "inlets": [[0, "start"]],
    "outlets": [[1, "end"], [2, "end"]]
}"#;

/// Largest nodal difference between the finite element and oracle solutions.
pub fn y_graph_max_difference() -> f64 {
    let (d, u, f) = (0.8, [0.5, 0.1, 0.0], 0.5);
    let net = load_network(Y).unwrap();
    let lm = build_line_mesh(&net.graph, 0.025).unwrap();
    let radii = [0.1, 0.07, 0.05];
    let tangents = [[1.0, 0.0, 0.0], [0.6, 0.8, 0.0], [0.6, -0.8, 0.0]];

    let cv = &lm.curve_vertices;
    let inlet = cv[0][0];
    let outlets = [*cv[1].last().unwrap(), *cv[2].last().unwrap()];
    let p = NetworkProblem {
        line: Line1d { graph: &net.graph, mesh: &lm, geoms: &net.geometries },
        physics: LinePhysics::new(d, u, f, 0.0),
        exterior: None,
        dirichlet: vec![(inlet, 1.0), (outlets[0], 0.0), (outlets[1], 0.0)],
        time: TimeGrid::new(1.0, 1.0),
        time_derivative: TimeDerivative::Conservative,
        solver: SolverOptions::default(),
    };
    let fem = solve_1d_steady(&p, 0.0).unwrap();

    // Oracle: per segment (a → b) the flux F = −A D (c_b − c_a)/h + A u_T (c_a + c_b)/2,
    // and at each node the outgoing fluxes balance the source of its half cells.
    let n = lm.num_vertices();
    let mut a = DMatrix::<f64>::zeros(n, n);
    let mut b = DVector::<f64>::zeros(n);
    for k in 0..3 {
        let area = std::f64::consts::PI * radii[k] * radii[k];
        let ut: f64 = (0..3).map(|i| u[i] * tangents[k][i]).sum();
        for w in 0..cv[k].len() - 1 {
            let (na, nb) = (cv[k][w], cv[k][w + 1]);
            let h = lm.curve_s[k][w + 1] - lm.curve_s[k][w];
            let (fa, fb) = (area * d / h + area * ut / 2.0, -area * d / h + area * ut / 2.0);
            for (row, sign) in [(na, 1.0), (nb, -1.0)] {
                a[(row, na)] += sign * fa;
                a[(row, nb)] += sign * fb;
                b[row] += f * area * h / 2.0;
            }
        }
    }
    for (node, value) in [(inlet, 1.0), (outlets[0], 0.0), (outlets[1], 0.0)] {
        a.row_mut(node).fill(0.0);
        a[(node, node)] = 1.0;
        b[node] = value;
    }
    let oracle = a.lu().solve(&b).unwrap();
    let err = fem.iter().zip(oracle.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    // the junction value is a genuine interior unknown
    let j = *cv[0].last().unwrap();
    assert!(fem[j] > 0.0 && fem[j] < 1.5);
    err
}

#[test]
fn y_graph_steady_state_matches_finite_differences() {
    let err = y_graph_max_difference();
    assert!(err < 1e-6, "max nodal difference {err}");
}
