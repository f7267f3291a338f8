//! Mixed-dimensional finite elements for solute transport in slender vessel
//! networks embedded in tissue.

pub mod analysislab;
pub mod coupling;
pub mod fem;
pub mod geometry;
pub mod linalg;
pub mod manufactured;
pub mod mesh;
pub mod models;
pub mod quadrature;
pub mod vec3;
pub mod vtk;
