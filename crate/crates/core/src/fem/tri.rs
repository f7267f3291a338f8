use crate::linalg::{CsrMatrix, TripletBuilder};
use crate::mesh::TriMesh;

fn gradients(p: &[[f64; 2]; 3]) -> (f64, [[f64; 2]; 3]) {
    let det = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[1][1] - p[0][1]) * (p[2][0] - p[0][0]);
    let g = [
        [(p[1][1] - p[2][1]) / det, (p[2][0] - p[1][0]) / det],
        [(p[2][1] - p[0][1]) / det, (p[0][0] - p[2][0]) / det],
        [(p[0][1] - p[1][1]) / det, (p[1][0] - p[0][0]) / det],
    ];
    (0.5 * det, g)
}

/// P1 stiffness and mass matrices of a planar triangulation.
pub fn assemble_2d(mesh: &TriMesh) -> (CsrMatrix, CsrMatrix) {
    let n = mesh.vertices.len();
    let mut k = TripletBuilder::with_capacity(n, n, 9 * mesh.triangles.len());
    let mut m = TripletBuilder::with_capacity(n, n, 9 * mesh.triangles.len());
    for tri in &mesh.triangles {
        let p = tri.map(|v| mesh.vertices[v]);
        let (area, g) = gradients(&p);
        for i in 0..3 {
            for j in 0..3 {
                k.push(tri[i], tri[j], area * (g[i][0] * g[j][0] + g[i][1] * g[j][1]));
                m.push(tri[i], tri[j], area / 12.0 * if i == j { 2.0 } else { 1.0 });
            }
        }
    }
    (k.build(), m.build())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_section_triangulation, OuterShape, SectionParams};

    #[test]
    fn kernel_and_area() {
        let s = build_section_triangulation(&SectionParams::new(0.0, 1.0, OuterShape::None, 4, 16)).unwrap();
        let (k, m) = assemble_2d(&s);
        assert!((m.total() - s.area()).abs() < 1e-13);
        let ones = vec![1.0; s.vertices.len()];
        assert!(k.matvec(&ones).iter().all(|v| v.abs() < 1e-12));
    }
}
