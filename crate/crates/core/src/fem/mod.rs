//! Finite element assembly: P1 on tetrahedra and triangles, and the
//! reduced line model on centerline graphs.

mod coefficient;
mod dirichlet;
mod line;
mod tet;
mod tri;

use thiserror::Error;

use crate::geometry::GeometryError;
use crate::linalg::LinalgError;
use crate::mesh::MeshError;
use crate::vec3::Vec3;

pub use coefficient::{check_diffusion, check_nonnegative, Field, Mat3, ScalarField, TensorField, VectorField};
pub use dirichlet::{apply_dirichlet, apply_dirichlet_matrix, marker_mask};
pub use line::{assemble_1d, integral_a, load_1d, Line1d, Term1d};
pub use tet::{
    assemble_3d, convection_matrix, element_convection, element_mass, element_stiffness, facet_mass_matrix, facet_mass_on,
    load_vector, mass_matrix, stiffness_matrix, tet_gradients, Term3d,
};
pub use tri::assemble_2d;

#[derive(Debug, Error)]
pub enum FemError {
    #[error("diffusion tensor is not symmetric positive definite at {point:?}")]
    NotSpd { point: Vec3 },
    #[error("coefficient is negative ({value}) at {point:?}")]
    NegativeCoefficient { point: Vec3, value: f64 },
    #[error("no facets carry marker {0}")]
    UnknownMarker(u8),
    #[error("no cells carry region {0}")]
    UnknownRegion(u8),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}
