use std::collections::{BTreeSet, HashMap};

use super::MeshError;
use crate::vec3::{self, Vec3};

/// Marked boundary or interface triangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Facet {
    pub vertices: [usize; 3],
    pub marker: u8,
}

/// Result of a topological consistency check.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MeshAudit {
    pub interior_faces: usize,
    pub boundary_faces: usize,
    /// Boundary faces carrying no facet marker.
    pub unmarked_boundary: usize,
    /// Faces claimed by more than two cells.
    pub overshared: usize,
    pub min_volume: f64,
}

impl MeshAudit {
    pub fn is_valid(&self) -> bool {
        self.unmarked_boundary == 0 && self.overshared == 0 && self.min_volume > 0.0
    }
}

/// Tetrahedral mesh with region and facet markers.
#[derive(Debug, Clone, PartialEq)]
pub struct TetMesh {
    pub vertices: Vec<Vec3>,
    pub cells: Vec<[usize; 4]>,
    pub regions: Vec<u8>,
    pub facets: Vec<Facet>,
    /// For submeshes: parent vertex index of every vertex.
    pub vertex_parent: Option<Vec<usize>>,
    /// For submeshes: parent cell index of every cell.
    pub cell_parent: Option<Vec<usize>>,
}

pub(crate) fn sorted3(f: [usize; 3]) -> [usize; 3] {
    let mut f = f;
    f.sort_unstable();
    f
}

pub(crate) const TET_FACES: [[usize; 3]; 4] = [[1, 2, 3], [0, 3, 2], [0, 1, 3], [0, 2, 1]];

impl TetMesh {
    pub fn new(
        vertices: Vec<Vec3>,
        cells: Vec<[usize; 4]>,
        regions: Vec<u8>,
        facets: Vec<Facet>,
    ) -> Result<TetMesh, MeshError> {
        if regions.len() != cells.len() {
            return Err(MeshError::Invalid("region count differs from cell count".into()));
        }
        let nv = vertices.len();
        if cells.iter().flatten().any(|&v| v >= nv) {
            return Err(MeshError::Invalid("cell references a missing vertex".into()));
        }
        let mesh = TetMesh {
            vertices,
            cells,
            regions,
            facets,
            vertex_parent: None,
            cell_parent: None,
        };
        for i in 0..mesh.cells.len() {
            let v = mesh.signed_volume(i);
            if !(v > 0.0) {
                return Err(MeshError::InvertedCell { index: i, volume: v });
            }
        }
        Ok(mesh)
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn cell_points(&self, c: usize) -> [Vec3; 4] {
        self.cells[c].map(|v| self.vertices[v])
    }

    pub fn signed_volume(&self, c: usize) -> f64 {
        let [a, b, c, d] = self.cell_points(c);
        vec3::det3(vec3::sub(b, a), vec3::sub(c, a), vec3::sub(d, a)) / 6.0
    }

    pub fn volume(&self) -> f64 {
        (0..self.cells.len()).map(|c| self.signed_volume(c)).sum()
    }

    pub fn region_volume(&self, region: u8) -> f64 {
        (0..self.cells.len())
            .filter(|&c| self.regions[c] == region)
            .map(|c| self.signed_volume(c))
            .sum()
    }

    pub fn facet_area(&self, f: &Facet) -> f64 {
        let [a, b, c] = f.vertices.map(|v| self.vertices[v]);
        0.5 * vec3::norm(vec3::cross(vec3::sub(b, a), vec3::sub(c, a)))
    }

    pub fn marker_area(&self, marker: u8) -> f64 {
        self.facets
            .iter()
            .filter(|f| f.marker == marker)
            .map(|f| self.facet_area(f))
            .sum()
    }

    pub fn has_marker(&self, marker: u8) -> bool {
        self.facets.iter().any(|f| f.marker == marker)
    }

    pub fn facets_with(&self, marker: u8) -> impl Iterator<Item = &Facet> {
        self.facets.iter().filter(move |f| f.marker == marker)
    }

    /// Sorted unique vertices of all facets carrying `marker`.
    pub fn boundary_vertices(&self, marker: u8) -> Result<Vec<usize>, MeshError> {
        if !self.has_marker(marker) {
            return Err(MeshError::UnknownMarker(marker));
        }
        let set: BTreeSet<usize> = self
            .facets_with(marker)
            .flat_map(|f| f.vertices)
            .collect();
        Ok(set.into_iter().collect())
    }

    pub fn region_markers(&self) -> BTreeSet<u8> {
        self.regions.iter().copied().collect()
    }

    /// All faces with the cells sharing them, keyed by sorted vertex triple.
    /// The stored orientation is the outward face of the first cell.
    pub fn face_map(&self) -> HashMap<[usize; 3], ([usize; 3], Vec<usize>)> {
        let mut map: HashMap<[usize; 3], ([usize; 3], Vec<usize>)> =
            HashMap::with_capacity(2 * self.cells.len());
        for (c, cell) in self.cells.iter().enumerate() {
            for lf in TET_FACES {
                let face = lf.map(|i| cell[i]);
                map.entry(sorted3(face))
                    .or_insert_with(|| (face, Vec::new()))
                    .1
                    .push(c);
            }
        }
        map
    }

    pub fn audit(&self) -> MeshAudit {
        let marked: BTreeSet<[usize; 3]> =
            self.facets.iter().map(|f| sorted3(f.vertices)).collect();
        let mut audit = MeshAudit {
            min_volume: f64::INFINITY,
            ..MeshAudit::default()
        };
        for (key, (_, cells)) in self.face_map() {
            match cells.len() {
                1 => {
                    audit.boundary_faces += 1;
                    if !marked.contains(&key) {
                        audit.unmarked_boundary += 1;
                    }
                }
                2 => audit.interior_faces += 1,
                _ => audit.overshared += 1,
            }
        }
        for c in 0..self.cells.len() {
            audit.min_volume = audit.min_volume.min(self.signed_volume(c));
        }
        audit
    }

    pub fn longest_edge(&self, c: usize) -> f64 {
        let p = self.cell_points(c);
        let mut h: f64 = 0.0;
        for i in 0..4 {
            for j in i + 1..4 {
                h = h.max(vec3::dist(p[i], p[j]));
            }
        }
        h
    }

    /// (h_min, h_max) over the cells of `region`, where a cell's size is its
    /// longest edge. `None` selects all cells.
    pub fn mesh_size(&self, region: Option<u8>) -> (f64, f64) {
        let mut out = (f64::INFINITY, 0.0_f64);
        for c in 0..self.cells.len() {
            if region.is_some_and(|r| self.regions[c] != r) {
                continue;
            }
            let h = self.longest_edge(c);
            out = (out.0.min(h), out.1.max(h));
        }
        out
    }

    /// Gives marker `to` to the facets marked with one of `from` that bound a
    /// cell of `region`. Returns the number of relabelled facets.
    pub fn relabel_facets(&mut self, from: &[u8], region: u8, to: u8) -> usize {
        let faces = self.face_map();
        let mut count = 0;
        for f in self.facets.iter_mut().filter(|f| from.contains(&f.marker)) {
            if let Some((_, cells)) = faces.get(&sorted3(f.vertices)) {
                if cells.iter().any(|&c| self.regions[c] == region) {
                    f.marker = to;
                    count += 1;
                }
            }
        }
        count
    }

    /// Submesh of the cells whose region is in `regions`. Vertices keep the
    /// parent ordering; marked facets lying on the submesh are retained.
    pub fn extract_submesh(&self, regions: &[u8]) -> Result<TetMesh, MeshError> {
        let cell_parent: Vec<usize> = (0..self.cells.len())
            .filter(|&c| regions.contains(&self.regions[c]))
            .collect();
        if cell_parent.is_empty() {
            return Err(MeshError::EmptyRegion(regions.first().copied().unwrap_or(0)));
        }
        let mut local = vec![usize::MAX; self.vertices.len()];
        for &c in &cell_parent {
            for &v in &self.cells[c] {
                local[v] = 0;
            }
        }
        let mut vertex_parent = Vec::new();
        for (v, slot) in local.iter_mut().enumerate() {
            if *slot == 0 {
                *slot = vertex_parent.len();
                vertex_parent.push(v);
            }
        }
        let cells: Vec<[usize; 4]> = cell_parent
            .iter()
            .map(|&c| self.cells[c].map(|v| local[v]))
            .collect();
        let faces: BTreeSet<[usize; 3]> = cells
            .iter()
            .flat_map(|cell| TET_FACES.map(|lf| sorted3(lf.map(|i| cell[i]))))
            .collect();
        let facets = self
            .facets
            .iter()
            .filter(|f| f.vertices.iter().all(|&v| local[v] != usize::MAX))
            .map(|f| Facet {
                vertices: f.vertices.map(|v| local[v]),
                marker: f.marker,
            })
            .filter(|f| faces.contains(&sorted3(f.vertices)))
            .collect();
        Ok(TetMesh {
            vertices: vertex_parent.iter().map(|&v| self.vertices[v]).collect(),
            regions: cell_parent.iter().map(|&c| self.regions[c]).collect(),
            cells,
            facets,
            vertex_parent: Some(vertex_parent),
            cell_parent: Some(cell_parent),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::unit_box;

    #[test]
    fn inverted_cell_rejected() {
        let v = vec![[0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        let err = TetMesh::new(v, vec![[0, 2, 1, 3]], vec![1], vec![]).unwrap_err();
        assert!(matches!(err, MeshError::InvertedCell { index: 0, .. }));
    }

    #[test]
    fn unknown_marker() {
        let m = unit_box(2, 1);
        assert!(matches!(m.boundary_vertices(42), Err(MeshError::UnknownMarker(42))));
    }
}
