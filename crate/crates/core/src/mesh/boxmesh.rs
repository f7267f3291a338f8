use super::{facet, Facet, TetMesh};

/// Structured mesh of the unit cube with `n` cells per direction, each cube
/// split into six tetrahedra around its main diagonal. Every cell gets
/// `region`; the whole boundary is `OUTER_BOUNDARY`.
pub fn unit_box(n: usize, region: u8) -> TetMesh {
    let m = n + 1;
    let id = |i: usize, j: usize, k: usize| (k * m + j) * m + i;
    let h = 1.0 / n as f64;
    let mut vertices = Vec::with_capacity(m * m * m);
    for k in 0..m {
        for j in 0..m {
            for i in 0..m {
                vertices.push([i as f64 * h, j as f64 * h, k as f64 * h]);
            }
        }
    }
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut cells = Vec::with_capacity(6 * n * n * n);
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                for perm in PERMS {
                    let mut idx = [i, j, k];
                    let mut tet = [id(i, j, k); 4];
                    for (step, &axis) in perm.iter().enumerate() {
                        idx[axis] += 1;
                        tet[step + 1] = id(idx[0], idx[1], idx[2]);
                    }
                    cells.push(tet);
                }
            }
        }
    }
    let mut mesh = TetMesh {
        vertices,
        regions: vec![region; cells.len()],
        cells,
        facets: Vec::new(),
        vertex_parent: None,
        cell_parent: None,
    };
    for c in 0..mesh.cells.len() {
        if mesh.signed_volume(c) < 0.0 {
            mesh.cells[c].swap(2, 3);
        }
    }
    let mut faces: Vec<_> = mesh
        .face_map()
        .into_iter()
        .filter(|(_, (_, owners))| owners.len() == 1)
        .map(|(key, (face, _))| (key, face))
        .collect();
    faces.sort_unstable();
    mesh.facets = faces
        .into_iter()
        .map(|(_, vertices)| Facet {
            vertices,
            marker: facet::OUTER_BOUNDARY,
        })
        .collect();
    mesh
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_is_watertight() {
        let m = unit_box(3, 3);
        assert_eq!(m.cells.len(), 6 * 27);
        assert!((m.volume() - 1.0).abs() < 1e-14);
        assert!(m.audit().is_valid());
        assert!((m.marker_area(facet::OUTER_BOUNDARY) - 6.0).abs() < 1e-13);
    }
}
