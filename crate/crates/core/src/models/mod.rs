//! Transient transport models: the full-dimensional reference, the coupled
//! 3D-1D and 3D-1D-1D reductions, and the stand-alone 1D network.

mod errors;
mod reduced;
mod reference;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coupling::CouplingError;
use crate::fem::{apply_dirichlet_matrix, FemError, ScalarField, TensorField, VectorField};
use crate::geometry::GeometryError;
use crate::linalg::{solve_iterative, CsrMatrix, IterativeOptions, LinalgError, LuFactorization};
use crate::mesh::MeshError;

pub use errors::{
    compute_model_error, l2_difference_located, l2_difference_on_submesh, l2_norm, l2_vs_extension, rates, ModelErrors,
};
pub use reduced::{
    solve_1d_network, solve_1d_steady, solve_3d1d, solve_3d1d1d, Coupled3d1d, Coupled3d1d1d, NetworkProblem,
    TimeDerivative,
};
pub use reference::{solve_reference_multidomain, Interface, ReferenceProblem, ReferenceRegion, ReferenceSolution};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid problem: {0}")]
    Invalid(String),
    #[error("non-conforming interface: {} unmatched facets, first {:?}", .0.len(), .0.first())]
    NonConforming(Vec<[usize; 3]>),
    #[error("final times differ: {0} vs {1}")]
    TimeMismatch(f64, f64),
    #[error("field {0} not found")]
    MissingField(String),
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Coupling(#[from] CouplingError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Uniform backward Euler time grid on [0, t_end].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub tau: f64,
    pub t_end: f64,
}

impl TimeGrid {
    pub fn new(tau: f64, t_end: f64) -> TimeGrid {
        TimeGrid { tau, t_end }
    }

    pub fn steps(&self) -> Result<usize, ModelError> {
        if !(self.tau > 0.0) || !(self.t_end >= 0.0) {
            return Err(ModelError::Invalid(format!("time step {} and end time {}", self.tau, self.t_end)));
        }
        let n = (self.t_end / self.tau).round();
        if (n * self.tau - self.t_end).abs() > 1e-9 * self.t_end.max(1.0) {
            return Err(ModelError::Invalid(format!("end time {} is not a multiple of {}", self.t_end, self.tau)));
        }
        Ok(n as usize)
    }

    pub fn time(&self, n: usize) -> f64 {
        n as f64 * self.tau
    }
}

/// Linear solver selection for the per-step systems.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    /// Systems larger than this use preconditioned BiCGStab instead of LU.
    pub iterative_threshold: usize,
    pub iterative: IterativeOptions,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { iterative_threshold: 200_000, iterative: IterativeOptions::default() }
    }
}

/// Coefficients of one 3D region.
#[derive(Debug, Clone)]
pub struct Physics {
    pub diffusion: TensorField,
    pub velocity: VectorField,
    pub source: ScalarField,
    pub initial: ScalarField,
}

impl Physics {
    pub fn new(d: f64, u: [f64; 3], f: f64, c0: f64) -> Physics {
        Physics {
            diffusion: TensorField::isotropic(d),
            velocity: VectorField::Constant(u),
            source: ScalarField::Constant(f),
            initial: ScalarField::Constant(c0),
        }
    }

    /// Whether the step matrix changes in time; sources only enter the load.
    pub fn operator_is_time_dependent(&self) -> bool {
        self.diffusion.is_time_dependent() || self.velocity.is_time_dependent()
    }
}

/// Coefficients of a reduced 1D model.
#[derive(Debug, Clone)]
pub struct LinePhysics {
    pub diffusion: ScalarField,
    pub velocity: VectorField,
    pub source: ScalarField,
    pub initial: ScalarField,
}

impl LinePhysics {
    pub fn new(d: f64, u: [f64; 3], f: f64, c0: f64) -> LinePhysics {
        LinePhysics {
            diffusion: ScalarField::Constant(d),
            velocity: VectorField::Constant(u),
            source: ScalarField::Constant(f),
            initial: ScalarField::Constant(c0),
        }
    }

    /// Whether the step matrix changes in time; sources only enter the load.
    pub fn operator_is_time_dependent(&self) -> bool {
        self.diffusion.is_time_dependent() || self.velocity.is_time_dependent()
    }
}

/// Nodal vectors per field at every stored time.
#[derive(Debug, Clone, PartialEq)]
pub struct TransientSolution {
    pub names: Vec<String>,
    pub times: Vec<f64>,
    pub states: Vec<Vec<Vec<f64>>>,
    /// Linear-solver iterations per step (0 for direct solves).
    pub iterations: Vec<usize>,
}

impl TransientSolution {
    pub fn new(names: &[&str]) -> TransientSolution {
        TransientSolution {
            names: names.iter().map(|s| s.to_string()).collect(),
            times: Vec::new(),
            states: Vec::new(),
            iterations: Vec::new(),
        }
    }

    pub fn push(&mut self, t: f64, state: Vec<Vec<f64>>) {
        self.times.push(t);
        self.states.push(state);
    }

    pub fn field_index(&self, name: &str) -> Result<usize, ModelError> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| ModelError::MissingField(name.to_string()))
    }

    pub fn at(&self, step: usize, name: &str) -> Result<&[f64], ModelError> {
        Ok(&self.states[step][self.field_index(name)?])
    }

    pub fn last(&self, name: &str) -> Result<&[f64], ModelError> {
        self.at(self.states.len() - 1, name)
    }

    pub fn final_time(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }
}

/// Factorized (or iteratively solved) step matrix with Dirichlet rows
/// eliminated symmetrically.
pub(crate) struct StepSolver {
    matrix: CsrMatrix,
    lu: Option<LuFactorization>,
    mask: Vec<bool>,
    values: Vec<f64>,
    lift: Vec<f64>,
    opts: SolverOptions,
}

impl StepSolver {
    /// Homogeneous constraints on the dofs in `mask`.
    pub(crate) fn new(a: &CsrMatrix, mask: Vec<bool>, opts: SolverOptions) -> Result<StepSolver, ModelError> {
        let n = a.nrows();
        StepSolver::with_values(a, mask, vec![0.0; n], opts)
    }

    pub(crate) fn with_values(
        a: &CsrMatrix,
        mask: Vec<bool>,
        values: Vec<f64>,
        opts: SolverOptions,
    ) -> Result<StepSolver, ModelError> {
        let n = a.nrows();
        let mut lift = vec![0.0; n];
        let matrix = if mask.iter().any(|&m| m) {
            let m = apply_dirichlet_matrix(a, &mut lift, &mask, &values);
            for (l, &c) in lift.iter_mut().zip(&mask) {
                if c {
                    *l = 0.0;
                }
            }
            m
        } else {
            a.clone()
        };
        let lu = if n <= opts.iterative_threshold { Some(LuFactorization::new(&matrix)?) } else { None };
        Ok(StepSolver { matrix, lu, mask, values, lift, opts })
    }

    pub(crate) fn solve(&self, mut rhs: Vec<f64>, x0: &[f64]) -> Result<(Vec<f64>, usize), ModelError> {
        for (i, r) in rhs.iter_mut().enumerate() {
            *r = if self.mask[i] { self.values[i] } else { *r + self.lift[i] };
        }
        match &self.lu {
            Some(lu) => Ok((lu.solve(&rhs)?, 0)),
            None => Ok(solve_iterative(&self.matrix, &rhs, Some(x0), &self.opts.iterative)?),
        }
    }
}

pub(crate) fn axpy_into(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}
