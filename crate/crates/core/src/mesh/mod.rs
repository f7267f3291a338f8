//! Simplicial meshes: extruded ring meshes of nested cylinders, structured
//! boxes, section triangulations and centerline line meshes.

mod boxmesh;
mod extrude;
mod line;
mod locate;
mod section;
mod tet;
mod tri;

use thiserror::Error;

pub use boxmesh::unit_box;
pub use extrude::{extrude, Axis, Extrusion};
pub use line::{build_line_mesh, LineMesh, LineSegment, LineVertex};
pub use locate::{barycentric, PointLocator};
pub use section::{build_section_triangulation, OuterShape, SectionParams};
pub use tet::{Facet, MeshAudit, TetMesh};
pub use tri::TriMesh;

/// Cell region markers.
pub mod region {
    pub const VESSEL: u8 = 1;
    pub const PVS: u8 = 2;
    pub const SURROUNDINGS: u8 = 3;
}

/// Facet (and section edge) markers. `GAMMA_V` lies on r = R1 and `GAMMA_S`
/// on r = R2; for a solid vessel (R1 = 0) the vessel wall is `GAMMA_S`.
pub mod facet {
    pub const GAMMA_V: u8 = 1;
    pub const GAMMA_S: u8 = 2;
    pub const OUTER_BOUNDARY: u8 = 3;
    pub const END_S0: u8 = 4;
    pub const END_SL: u8 = 5;
    pub const INNER_WALL: u8 = 6;
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("invalid section parameters: {0}")]
    InvalidSection(String),
    #[error("inverted cell {index} (signed volume {volume:e})")]
    InvertedCell { index: usize, volume: f64 },
    #[error("region {0} is empty")]
    EmptyRegion(u8),
    #[error("unknown marker {0}")]
    UnknownMarker(u8),
    #[error("invalid mesh: {0}")]
    Invalid(String),
}
