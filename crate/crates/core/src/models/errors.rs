use serde::{Deserialize, Serialize};

use super::{ModelError, ReferenceSolution, TransientSolution};
use crate::coupling::extend_1d_to_3d;
use crate::fem::{mass_matrix, tet_gradients, ScalarField};
use crate::geometry::CenterlineGraph;
use crate::mesh::{LineMesh, PointLocator, TetMesh};
use crate::quadrature::tet_degree2;
use crate::vec3::Vec3;

/// Model errors at the final time. `etilde_*` are volume-normalized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelErrors {
    pub e_v: f64,
    pub etilde_v: f64,
    pub e_s: f64,
    pub e_p: Option<f64>,
    pub etilde_p: Option<f64>,
}

/// L² norm of a P1 field.
pub fn l2_norm(mesh: &TetMesh, values: &[f64]) -> f64 {
    let m = mass_matrix(mesh, None, &ScalarField::Constant(1.0), 0.0);
    m.bilinear(values, values).max(0.0).sqrt()
}

fn quadrature_points(mesh: &TetMesh) -> Vec<(usize, [f64; 4], Vec3, f64)> {
    let mut out = Vec::with_capacity(4 * mesh.num_cells());
    for c in 0..mesh.num_cells() {
        let p = mesh.cell_points(c);
        let (vol, _) = tet_gradients(&p);
        for (l, w) in tet_degree2() {
            let x = std::array::from_fn(|k| (0..4).map(|i| l[i] * p[i][k]).sum());
            out.push((c, l, x, w * vol));
        }
    }
    out
}

fn p1_value(mesh: &TetMesh, values: &[f64], c: usize, l: &[f64; 4]) -> f64 {
    mesh.cells[c].iter().zip(l).map(|(&v, w)| values[v] * w).sum()
}

/// `‖v − E ĉ‖_{L²}` over `mesh`, with E the uniform-in-section extension.
pub fn l2_vs_extension(mesh: &TetMesh, values: &[f64], graph: &CenterlineGraph, line: &LineMesh, chat: &[f64]) -> f64 {
    let q = quadrature_points(mesh);
    let pts: Vec<Vec3> = q.iter().map(|e| e.2).collect();
    let ext = extend_1d_to_3d(graph, line, chat, &pts);
    q.iter()
        .zip(ext)
        .map(|((c, l, _, w), e)| {
            let d = p1_value(mesh, values, *c, l) - e;
            w * d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// L² difference between a field on a submesh and a field on its parent.
pub fn l2_difference_on_submesh(sub: &TetMesh, values: &[f64], parent_values: &[f64]) -> Result<f64, ModelError> {
    let map = sub.vertex_parent.as_ref().ok_or_else(|| ModelError::Invalid("mesh has no parent map".into()))?;
    let d: Vec<f64> = values.iter().zip(map).map(|(v, &g)| v - parent_values[g]).collect();
    Ok(l2_norm(sub, &d))
}

/// L² difference over `a` between `va` and the field `vb` on another mesh,
/// evaluated by point location at the quadrature points of `a`.
pub fn l2_difference_located(a: &TetMesh, va: &[f64], b: &TetMesh, locator: &PointLocator, vb: &[f64]) -> Result<f64, ModelError> {
    let mut acc = 0.0;
    for (c, l, x, w) in quadrature_points(a) {
        let other = locator
            .interpolate(b, vb, x)
            .ok_or_else(|| ModelError::Invalid(format!("point {x:?} not found in the second mesh")))?;
        let d = p1_value(a, va, c, &l) - other;
        acc += w * d * d;
    }
    Ok(acc.sqrt())
}

fn shares_vertices(sub: &TetMesh, parent: &TetMesh) -> bool {
    match &sub.vertex_parent {
        Some(map) => map.iter().enumerate().all(|(l, &g)| g < parent.num_vertices() && sub.vertices[l] == parent.vertices[g]),
        None => false,
    }
}

fn tissue_difference(sub: &TetMesh, cs: &[f64], mesh: &TetMesh, c: &[f64]) -> Result<f64, ModelError> {
    if shares_vertices(sub, mesh) {
        l2_difference_on_submesh(sub, cs, c)
    } else {
        l2_difference_located(sub, cs, mesh, &PointLocator::new(mesh), c)
    }
}

/// Errors between a reference solution (fields `c_v`, `c_s` and optionally
/// `c_p`) and a reduced one (`c` with `chat`, or `c` with `chat_v` and
/// `chat_p`) at the final time. `mesh` is the 3D mesh of the reduced model.
pub fn compute_model_error(
    reference: &ReferenceSolution,
    reduced: &TransientSolution,
    mesh: &TetMesh,
    graph: &CenterlineGraph,
    line: &LineMesh,
) -> Result<ModelErrors, ModelError> {
    let (t_ref, t_red) = (reference.solution.final_time(), reduced.final_time());
    if (t_ref - t_red).abs() > 1e-12 * t_ref.abs().max(1.0) {
        return Err(ModelError::TimeMismatch(t_ref, t_red));
    }
    let ref_sol = &reference.solution;
    let three_field = reduced.field_index("chat_v").is_ok();
    let vessel_1d = if three_field { "chat_v" } else { "chat" };

    let mesh_v = reference.submesh("c_v")?;
    let e_v = l2_vs_extension(mesh_v, ref_sol.last("c_v")?, graph, line, reduced.last(vessel_1d)?);
    let vol_v = mesh_v.volume();
    let mesh_s = reference.submesh("c_s")?;
    let e_s = tissue_difference(mesh_s, ref_sol.last("c_s")?, mesh, reduced.last("c")?)?;

    let (e_p, etilde_p) = if three_field {
        let mesh_p = reference.submesh("c_p")?;
        let e = l2_vs_extension(mesh_p, ref_sol.last("c_p")?, graph, line, reduced.last("chat_p")?);
        (Some(e), Some(e / (vol_v + mesh_p.volume()).sqrt()))
    } else {
        (None, None)
    };
    Ok(ModelErrors { e_v, etilde_v: e_v / vol_v.sqrt(), e_s, e_p, etilde_p })
}

/// Convergence rates `log(E_i/E_{i+1}) / log(R_i/R_{i+1})`; the first entry is `None`.
pub fn rates(radii: &[f64], errors: &[f64]) -> Vec<Option<f64>> {
    (0..errors.len())
        .map(|i| (i > 0).then(|| (errors[i - 1] / errors[i]).ln() / (radii[i - 1] / radii[i]).ln()))
        .collect()
}
