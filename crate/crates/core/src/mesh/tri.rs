use std::collections::HashMap;

use super::MeshError;

/// Planar triangle mesh (cross-sections) with region and edge markers.
#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    pub vertices: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    pub regions: Vec<u8>,
    pub edges: Vec<([usize; 2], u8)>,
    /// Per-vertex marker of the ring the vertex was generated on (0 if none).
    pub vertex_rings: Vec<u8>,
}

impl TriMesh {
    pub fn signed_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t].map(|v| self.vertices[v]);
        0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
    }

    pub fn area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.signed_area(t)).sum()
    }

    pub fn region_area(&self, region: u8) -> f64 {
        (0..self.triangles.len())
            .filter(|&t| self.regions[t] == region)
            .map(|t| self.signed_area(t))
            .sum()
    }

    pub fn edge_count(&self, marker: u8) -> usize {
        self.edges.iter().filter(|e| e.1 == marker).count()
    }

    pub fn scaled(&self, alpha: f64) -> TriMesh {
        let mut m = self.clone();
        for v in &mut m.vertices {
            v[0] *= alpha;
            v[1] *= alpha;
        }
        m
    }

    pub fn extract_submesh(&self, regions: &[u8]) -> Result<TriMesh, MeshError> {
        let keep: Vec<usize> = (0..self.triangles.len())
            .filter(|&t| regions.contains(&self.regions[t]))
            .collect();
        if keep.is_empty() {
            return Err(MeshError::EmptyRegion(regions.first().copied().unwrap_or(0)));
        }
        let mut local = vec![usize::MAX; self.vertices.len()];
        for &t in &keep {
            for &v in &self.triangles[t] {
                local[v] = 0;
            }
        }
        let mut vertices = Vec::new();
        let mut vertex_rings = Vec::new();
        for (v, slot) in local.iter_mut().enumerate() {
            if *slot == 0 {
                *slot = vertices.len();
                vertices.push(self.vertices[v]);
                vertex_rings.push(self.vertex_rings[v]);
            }
        }
        let edges = self
            .edges
            .iter()
            .filter(|(e, _)| e.iter().all(|&v| local[v] != usize::MAX))
            .map(|&(e, m)| (e.map(|v| local[v]), m))
            .collect();
        Ok(TriMesh {
            vertices,
            triangles: keep.iter().map(|&t| self.triangles[t].map(|v| local[v])).collect(),
            regions: keep.iter().map(|&t| self.regions[t]).collect(),
            edges,
            vertex_rings,
        })
    }

    /// Nested red refinement: every triangle is split into four through its
    /// edge midpoints. Marked edges are split in two and keep their marker.
    pub fn refine_uniform(&self) -> TriMesh {
        let mut vertices = self.vertices.clone();
        let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
        let mut midpoint = |a: usize, b: usize| -> usize {
            *mid.entry((a.min(b), a.max(b))).or_insert_with(|| {
                let (p, q) = (vertices[a], vertices[b]);
                vertices.push([0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]);
                vertices.len() - 1
            })
        };
        let mut triangles = Vec::with_capacity(4 * self.triangles.len());
        let mut regions = Vec::with_capacity(4 * self.triangles.len());
        for (t, &[a, b, c]) in self.triangles.iter().enumerate() {
            let (ab, bc, ca) = (midpoint(a, b), midpoint(b, c), midpoint(c, a));
            triangles.extend([[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]);
            regions.extend([self.regions[t]; 4]);
        }
        let mut edges = Vec::with_capacity(2 * self.edges.len());
        for &([a, b], m) in &self.edges {
            let ab = midpoint(a, b);
            edges.push(([a, ab], m));
            edges.push(([ab, b], m));
        }
        let mut vertex_rings = self.vertex_rings.clone();
        vertex_rings.resize(vertices.len(), 0);
        TriMesh {
            vertices,
            triangles,
            regions,
            edges,
            vertex_rings,
        }
    }
}
