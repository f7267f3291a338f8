use serde::{Deserialize, Serialize};

use super::tet::sorted3;
use super::{facet, region, Facet, MeshError, TetMesh, TriMesh};
use crate::vec3::Vec3;

/// Direction of the extrusion; the section plane is spanned by the two
/// remaining axes in cyclic order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    #[default]
    Z,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extrusion {
    pub length: f64,
    pub n_layers: usize,
    pub origin: Vec3,
    pub axis: Axis,
}

impl Extrusion {
    pub fn new(length: f64, n_layers: usize) -> Extrusion {
        Extrusion {
            length,
            n_layers,
            origin: [0.0; 3],
            axis: Axis::Z,
        }
    }

    pub fn along(mut self, axis: Axis, origin: Vec3) -> Extrusion {
        self.axis = axis;
        self.origin = origin;
        self
    }

    fn place(&self, x: f64, y: f64, z: f64) -> Vec3 {
        let o = self.origin;
        match self.axis {
            Axis::Z => [o[0] + x, o[1] + y, o[2] + z],
            Axis::X => [o[0] + z, o[1] + x, o[2] + y],
        }
    }
}

const ROTATIONS: [[usize; 6]; 6] = [
    [0, 1, 2, 3, 4, 5],
    [1, 2, 0, 4, 5, 3],
    [2, 0, 1, 5, 3, 4],
    [3, 5, 4, 0, 2, 1],
    [4, 3, 5, 1, 0, 2],
    [5, 4, 3, 2, 1, 0],
];

/// Splits a prism (bottom triangle 0,1,2 and top 3,4,5) into three tets so
/// that every quadrilateral face is cut through its smallest global vertex.
/// The choice depends only on the face's own indices, so neighbouring prisms
/// agree.
fn split_prism(v: [usize; 6]) -> [[usize; 4]; 3] {
    let first = (0..6).min_by_key(|&i| v[i]).unwrap();
    let r = ROTATIONS[first].map(|i| v[i]);
    if r[1].min(r[5]) < r[2].min(r[4]) {
        [[r[0], r[1], r[2], r[5]], [r[0], r[1], r[5], r[4]], [r[0], r[4], r[5], r[3]]]
    } else {
        [[r[0], r[1], r[2], r[4]], [r[0], r[4], r[2], r[5]], [r[0], r[4], r[5], r[3]]]
    }
}

fn interface_marker(a: u8, b: u8) -> Option<u8> {
    let (lo, hi) = (a.min(b), a.max(b));
    match (lo, hi) {
        (region::VESSEL, region::PVS) => Some(facet::GAMMA_V),
        (region::PVS, region::SURROUNDINGS) | (region::VESSEL, region::SURROUNDINGS) => {
            Some(facet::GAMMA_S)
        }
        _ => None,
    }
}

/// Extrudes a section into a tetrahedral mesh of `n_layers` prism layers.
pub fn extrude(section: &TriMesh, ex: &Extrusion) -> Result<TetMesh, MeshError> {
    if ex.n_layers == 0 || !(ex.length > 0.0) {
        return Err(MeshError::Invalid("extrusion needs a positive length and at least one layer".into()));
    }
    let nv = section.vertices.len();
    let nl = ex.n_layers;
    let mut vertices = Vec::with_capacity(nv * (nl + 1));
    for l in 0..=nl {
        let z = ex.length * l as f64 / nl as f64;
        for p in &section.vertices {
            vertices.push(ex.place(p[0], p[1], z));
        }
    }
    let mut cells = Vec::with_capacity(3 * section.triangles.len() * nl);
    let mut regions = Vec::with_capacity(cells.capacity());
    for l in 0..nl {
        for (t, tri) in section.triangles.iter().enumerate() {
            let bottom = tri.map(|v| l * nv + v);
            let prism = [bottom[0], bottom[1], bottom[2], bottom[0] + nv, bottom[1] + nv, bottom[2] + nv];
            for tet in split_prism(prism) {
                cells.push(tet);
                regions.push(section.regions[t]);
            }
        }
    }
    let mut mesh = TetMesh {
        vertices,
        cells,
        regions,
        facets: Vec::new(),
        vertex_parent: None,
        cell_parent: None,
    };
    for c in 0..mesh.cells.len() {
        if mesh.signed_volume(c) < 0.0 {
            mesh.cells[c].swap(2, 3);
        }
        let v = mesh.signed_volume(c);
        if !(v > 0.0) {
            return Err(MeshError::InvertedCell { index: c, volume: v });
        }
    }

    let mut facets = Vec::new();
    let mut faces: Vec<_> = mesh.face_map().into_iter().collect();
    faces.sort_unstable_by_key(|(key, _)| *key);
    for (key, (face, owners)) in faces {
        let marker = match owners.as_slice() {
            [a, b] => match interface_marker(mesh.regions[*a], mesh.regions[*b]) {
                Some(m) => m,
                None => continue,
            },
            [_] => {
                let layers = key.map(|v| v / nv);
                if layers.iter().all(|&l| l == 0) {
                    facet::END_S0
                } else if layers.iter().all(|&l| l == nl) {
                    facet::END_SL
                } else {
                    let rings = key.map(|v| section.vertex_rings[v % nv]);
                    if rings[0] != 0 && rings.iter().all(|&r| r == rings[0]) {
                        rings[0]
                    } else {
                        return Err(MeshError::Invalid(format!("unclassified boundary face {key:?}")));
                    }
                }
            }
            _ => return Err(MeshError::Invalid(format!("face {key:?} shared by more than two cells"))),
        };
        debug_assert_eq!(sorted3(face), key);
        facets.push(Facet { vertices: face, marker });
    }
    mesh.facets = facets;
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_section_triangulation, OuterShape, SectionParams};

    #[test]
    fn prism_split_is_conforming_and_exact() {
        let p = SectionParams::new(0.1, 0.2, OuterShape::Disk(0.5), 2, 16);
        let s = build_section_triangulation(&p).unwrap();
        let m = extrude(&s, &Extrusion::new(1.0, 4)).unwrap();
        assert_eq!(m.cells.len(), 3 * s.triangles.len() * 4);
        assert!((m.volume() - s.area()).abs() < 1e-12 * s.area());
        let audit = m.audit();
        assert!(audit.is_valid(), "{audit:?}");
        let n_tris = s.triangles.len();
        assert_eq!(m.facets_with(facet::END_S0).count(), n_tris);
        assert_eq!(m.facets_with(facet::GAMMA_V).count(), 2 * 16 * 4);
        assert_eq!(m.facets_with(facet::GAMMA_S).count(), 2 * 16 * 4);
    }

    #[test]
    fn x_axis_extrusion_runs_along_x() {
        let p = SectionParams::new(0.0, 0.1, OuterShape::Disk(0.3), 2, 8);
        let s = build_section_triangulation(&p).unwrap();
        let m = extrude(&s, &Extrusion::new(2.0, 3).along(Axis::X, [-1.0, 0.0, 0.0])).unwrap();
        let xs: Vec<f64> = m.vertices.iter().map(|v| v[0]).collect();
        assert_eq!(xs.iter().cloned().fold(f64::INFINITY, f64::min), -1.0);
        assert_eq!(xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max), 1.0);
        assert!(m.audit().is_valid());
    }
}
