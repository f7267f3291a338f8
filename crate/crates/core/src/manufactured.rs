//! Manufactured-solution convergence studies for the 3D transport solver on
//! the unit cube.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::fem::{tet_gradients, ScalarField, TensorField, VectorField};
use crate::mesh::{facet, region, unit_box, TetMesh};
use crate::quadrature::tet_degree2;
use crate::models::{
    l2_norm, solve_reference_multidomain, ModelError, Physics, ReferenceProblem, ReferenceRegion,
    SolverOptions, TimeGrid,
};

/// Errors and observed rates for a sequence of refinements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceStudy {
    /// Mesh size or time step of each run.
    pub steps: Vec<f64>,
    pub errors: Vec<f64>,
    pub rates: Vec<f64>,
}

impl ConvergenceStudy {
    fn new(steps: Vec<f64>, errors: Vec<f64>) -> ConvergenceStudy {
        let rates = steps
            .windows(2)
            .zip(errors.windows(2))
            .map(|(h, e)| (e[0] / e[1]).ln() / (h[0] / h[1]).ln())
            .collect();
        ConvergenceStudy { steps, errors, rates }
    }

    pub fn min_rate(&self) -> f64 {
        self.rates.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

const U: [f64; 3] = [0.3, 0.2, 0.1];
const D: f64 = 1.0;

fn shape(x: [f64; 3]) -> (f64, [f64; 3]) {
    let s = x.map(|v| (PI * v).sin());
    let c = x.map(|v| (PI * v).cos());
    (s[0] * s[1] * s[2], [PI * c[0] * s[1] * s[2], PI * s[0] * c[1] * s[2], PI * s[0] * s[1] * c[2]])
}

/// `c = g(t) sin(πx) sin(πy) sin(πz)` and its source, for a time profile with
/// derivative `dg`.
fn problem(g: fn(f64) -> f64, dg: fn(f64) -> f64) -> (Physics, ScalarField) {
    let exact = ScalarField::function(move |x, t| g(t) * shape(x).0, true);
    let source = ScalarField::function(
        move |x, t| {
            let (s, grad) = shape(x);
            let adv: f64 = (0..3).map(|k| U[k] * grad[k]).sum();
            dg(t) * s + g(t) * (3.0 * PI * PI * D * s + adv)
        },
        true,
    );
    let physics = Physics {
        diffusion: TensorField::isotropic(D),
        velocity: VectorField::Constant(U),
        source,
        initial: exact.clone(),
    };
    (physics, exact)
}

fn solve_final(n: usize, time: TimeGrid, physics: &Physics) -> Result<(TetMesh, Vec<f64>), ModelError> {
    let mesh = unit_box(n, region::SURROUNDINGS);
    let p = ReferenceProblem {
        mesh: &mesh,
        regions: vec![ReferenceRegion { region: region::SURROUNDINGS, name: "c".into(), physics: physics.clone() }],
        interfaces: vec![],
        dirichlet: vec![facet::OUTER_BOUNDARY],
        time,
        solver: SolverOptions::default(),
    };
    let sol = solve_reference_multidomain(&p)?;
    let c = sol.solution.last("c")?.to_vec();
    let sub = sol.submeshes.into_iter().next().expect("one region");
    Ok((sub, c))
}

/// Spatial study on `unit_box(n)` for each `n`. The exact solution is linear
/// in time, so backward Euler adds no temporal error.
pub fn spatial_convergence(ns: &[usize], tau: f64, t_end: f64) -> Result<ConvergenceStudy, ModelError> {
    let (physics, exact) = problem(|t| 1.0 + t, |_| 1.0);
    let mut errors = Vec::new();
    for &n in ns {
        let (mesh, c) = solve_final(n, TimeGrid::new(tau, t_end), &physics)?;
        errors.push(l2_error(&mesh, &c, &exact, t_end));
    }
    Ok(ConvergenceStudy::new(ns.iter().map(|&n| 1.0 / n as f64).collect(), errors))
}

/// Temporal study on a fixed mesh for an exponentially decaying solution.
/// Errors are measured against a run with a step eight times smaller than the
/// finest, which removes the spatial error from the comparison.
pub fn temporal_convergence(n: usize, taus: &[f64], t_end: f64) -> Result<ConvergenceStudy, ModelError> {
    let (physics, _) = problem(|t| (-t).exp(), |t| -(-t).exp());
    let finest = taus.iter().copied().fold(f64::INFINITY, f64::min) / 8.0;
    let (mesh, reference) = solve_final(n, TimeGrid::new(finest, t_end), &physics)?;
    let mut errors = Vec::new();
    for &tau in taus {
        let (_, c) = solve_final(n, TimeGrid::new(tau, t_end), &physics)?;
        let d: Vec<f64> = c.iter().zip(&reference).map(|(a, b)| a - b).collect();
        errors.push(l2_norm(&mesh, &d));
    }
    Ok(ConvergenceStudy::new(taus.to_vec(), errors))
}

fn l2_error(mesh: &TetMesh, c: &[f64], exact: &ScalarField, t: f64) -> f64 {
    let mut sum = 0.0;
    for cell in 0..mesh.num_cells() {
        let p = mesh.cell_points(cell);
        let (vol, _) = tet_gradients(&p);
        for (l, w) in tet_degree2() {
            let x = std::array::from_fn(|k| (0..4).map(|i| l[i] * p[i][k]).sum());
            let ch: f64 = (0..4).map(|i| l[i] * c[mesh.cells[cell][i]]).sum();
            let d = ch - exact.eval(x, t);
            sum += w * vol * d * d;
        }
    }
    sum.sqrt()
}
