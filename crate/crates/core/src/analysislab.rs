//! Discrete Poincaré and trace (Stekloff) constants of vessel sections and
//! their surroundings.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fem::{assemble_2d, assemble_3d, FemError, ScalarField, Term3d};
use crate::linalg::{dominant_inverse_gevp, smallest_nonzero_gevp, EigenOptions, LinalgError};
use crate::mesh::{build_section_triangulation, extrude, facet, region, Extrusion, MeshError, OuterShape, SectionParams, TetMesh, TriMesh};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("empty radius schedule")]
    EmptySchedule,
    #[error("no facets carry the interface marker {0}")]
    EmptyInterface(u8),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Fem(#[from] FemError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstantKind {
    Poincare,
    Stekloff,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenResult {
    pub lambda1: f64,
    /// K_p = λ₁^{-1/2}/ε for Poincaré, λ₁^{-1/2} for the trace bound.
    pub constant: f64,
    pub eps: f64,
    pub vector: Vec<f64>,
    pub dofs: usize,
}

/// Smallest nonzero Neumann eigenvalue of the Laplacian on a section and
/// the Poincaré constant `K_p = λ₁^{-1/2} / ε`, ε being the section diameter.
pub fn poincare_constant(section: &TriMesh) -> Result<EigenResult, AnalysisError> {
    let (k, m) = assemble_2d(section);
    let ones = vec![1.0; section.vertices.len()];
    let pair = smallest_nonzero_gevp(&k, &m, Some(&ones), &EigenOptions::default())?;
    let eps = 2.0 * section.vertices.iter().map(|p| p[0].hypot(p[1])).fold(0.0, f64::max);
    Ok(EigenResult {
        lambda1: pair.value,
        constant: pair.value.powf(-0.5) / eps,
        eps,
        vector: pair.vector,
        dofs: ones.len(),
    })
}

/// Smallest eigenvalue of `−Δu + u = 0` with `∇u·n = λu` on the facets
/// marked `gamma` (natural elsewhere) and the trace bound `λ₁^{-1/2}`.
/// `eps` is twice the largest distance of a Γ vertex from the z-axis.
pub fn stekloff_constant(mesh: &TetMesh, gamma: u8) -> Result<EigenResult, AnalysisError> {
    if !mesh.has_marker(gamma) {
        return Err(AnalysisError::EmptyInterface(gamma));
    }
    let one = ScalarField::Constant(1.0);
    let d = crate::fem::TensorField::isotropic(1.0);
    let mut mats = assemble_3d(mesh, None, &[Term3d::Stiffness(&d), Term3d::Mass(&one), Term3d::FacetMass(&one, gamma)], 0.0)?;
    let b = mats.pop().unwrap();
    let a = mats[0].add(1.0, &mats[1], 1.0);
    let pair = dominant_inverse_gevp(&a, &b, &EigenOptions::default())?;
    let mut r = 0.0f64;
    for f in mesh.facets_with(gamma) {
        for &v in &f.vertices {
            let p = mesh.vertices[v];
            r = r.max(p[0].hypot(p[1]));
        }
    }
    Ok(EigenResult {
        lambda1: pair.value,
        constant: pair.value.powf(-0.5),
        eps: 2.0 * r,
        vector: pair.vector,
        dofs: a.nrows(),
    })
}

/// Initial mesh resolution and refinement rule for a sweep entry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MeshControls {
    pub n_radial: usize,
    pub n_azimuthal: usize,
    /// Layers along the axis (trace problem only).
    pub n_layers: usize,
    /// Extent of the surroundings (trace problem only): cylinder radius and length.
    pub outer_radius: f64,
    pub length: f64,
    /// Relative change between successive meshes that counts as converged.
    pub tol: f64,
    pub max_refinements: usize,
}

impl MeshControls {
    pub fn poincare() -> MeshControls {
        MeshControls { n_radial: 8, n_azimuthal: 32, n_layers: 0, outer_radius: 0.0, length: 0.0, tol: 1e-3, max_refinements: 4 }
    }

    pub fn stekloff() -> MeshControls {
        MeshControls { n_radial: 2, n_azimuthal: 16, n_layers: 8, outer_radius: 1.0, length: 1.0, tol: 0.05, max_refinements: 2 }
    }

    fn refined(&self, level: usize, kind: ConstantKind) -> MeshControls {
        let f = 1 << level;
        let mut c = *self;
        c.n_radial *= f;
        c.n_azimuthal *= f;
        if kind == ConstantKind::Stekloff {
            c.n_layers *= f;
        }
        c
    }
}

impl Default for MeshControls {
    fn default() -> Self {
        MeshControls::poincare()
    }
}

/// Section of the Poincaré problem: disk (R1 = 0) or annulus R1 < r < R2.
pub fn poincare_section(r1: f64, r2: f64, c: &MeshControls) -> Result<TriMesh, AnalysisError> {
    let mut p = SectionParams::new(r1, r2, OuterShape::None, c.n_radial, c.n_azimuthal);
    p.hole = r1 > 0.0;
    Ok(build_section_triangulation(&p)?)
}

/// Surroundings of a straight vessel of radius `r` inside a cylinder, with
/// the vessel wall marked GAMMA_S.
pub fn stekloff_mesh(r: f64, c: &MeshControls) -> Result<TetMesh, AnalysisError> {
    let sec = build_section_triangulation(&SectionParams::new(0.0, r, OuterShape::Disk(c.outer_radius), c.n_radial, c.n_azimuthal))?;
    let mesh = extrude(&sec, &Extrusion::new(c.length, c.n_layers))?;
    Ok(mesh.extract_submesh(&[region::SURROUNDINGS])?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantEntry {
    pub r1: f64,
    pub r2: f64,
    pub eps: f64,
    pub lambda1: f64,
    pub constant: f64,
    pub dofs: usize,
    pub refinements: usize,
    pub converged: bool,
}

/// Computes one constant, refining the mesh by doubling its resolution until
/// the eigenvalue changes by less than `controls.tol`.
pub fn converged_constant(kind: ConstantKind, r1: f64, r2: f64, controls: &MeshControls) -> Result<ConstantEntry, AnalysisError> {
    let solve = |level: usize| -> Result<EigenResult, AnalysisError> {
        let c = controls.refined(level, kind);
        match kind {
            ConstantKind::Poincare => poincare_constant(&poincare_section(r1, r2, &c)?),
            ConstantKind::Stekloff => stekloff_constant(&stekloff_mesh(r2, &c)?, facet::GAMMA_S),
        }
    };
    let mut prev = solve(0)?;
    let mut level = 0;
    let mut converged = false;
    while level < controls.max_refinements {
        level += 1;
        let next = solve(level)?;
        let change = ((next.lambda1 - prev.lambda1) / next.lambda1).abs();
        prev = next;
        if change < controls.tol {
            converged = true;
            break;
        }
    }
    Ok(ConstantEntry {
        r1,
        r2,
        eps: prev.eps,
        lambda1: prev.lambda1,
        constant: prev.constant,
        dofs: prev.dofs,
        refinements: level,
        converged,
    })
}

/// Least-squares line `y = slope·x + intercept` with coefficient of determination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> LinearFit {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x.iter().zip(y).map(|(a, b)| (b - slope * a - intercept).powi(2)).sum();
    LinearFit { slope, intercept, r_squared: if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 } }
}

/// Fit of `y = C ε^{1/2} |ln ε|^{1/2}` with one constant, least squares in log space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceFit {
    pub c: f64,
    /// Largest `|y − fit| / y` over the fitted points.
    pub max_rel_residual: f64,
}

pub fn trace_law(eps: f64) -> f64 {
    (eps * eps.ln().abs()).sqrt()
}

pub fn fit_trace_law(eps: &[f64], y: &[f64]) -> TraceFit {
    let log_c = eps.iter().zip(y).map(|(&e, &v)| v.ln() - trace_law(e).ln()).sum::<f64>() / eps.len() as f64;
    let c = log_c.exp();
    let max_rel_residual = eps
        .iter()
        .zip(y)
        .map(|(&e, &v)| ((v - c * trace_law(e)) / v).abs())
        .fold(0.0, f64::max);
    TraceFit { c, max_rel_residual }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantSweepResult {
    pub kind: ConstantKind,
    pub entries: Vec<ConstantEntry>,
    /// λ₁^{-1/2} against ε (Poincaré sweeps with at least two distinct ε).
    pub linear: Option<LinearFit>,
    /// Trace law fit (trace sweeps with at least two distinct ε).
    pub trace: Option<TraceFit>,
}

impl ConstantSweepResult {
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "R1,R2,eps,lambda1,constant")?;
        for e in &self.entries {
            writeln!(w, "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}", e.r1, e.r2, e.eps, e.lambda1, e.constant)?;
        }
        match (&self.linear, &self.trace) {
            (Some(f), _) => writeln!(w, "# fit slope={:.17e} intercept={:.17e} r2={:.17e}", f.slope, f.intercept, f.r_squared),
            (_, Some(f)) => writeln!(w, "# fit C={:.17e} max_rel_residual={:.17e}", f.c, f.max_rel_residual),
            _ => Ok(()),
        }
    }
}

/// Runs the schedule of (R1, R2) pairs in parallel. For trace sweeps R2 is
/// the vessel radius and R1 is ignored.
pub fn run_constant_sweep(kind: ConstantKind, schedule: &[(f64, f64)], controls: &MeshControls) -> Result<ConstantSweepResult, AnalysisError> {
    if schedule.is_empty() {
        return Err(AnalysisError::EmptySchedule);
    }
    let entries: Vec<ConstantEntry> = schedule
        .par_iter()
        .map(|&(r1, r2)| converged_constant(kind, r1, r2, controls))
        .collect::<Result<_, _>>()?;
    let eps: Vec<f64> = entries.iter().map(|e| e.eps).collect();
    let inv: Vec<f64> = entries.iter().map(|e| e.lambda1.powf(-0.5)).collect();
    let spread = eps.iter().any(|&e| (e - eps[0]).abs() > 1e-12 * eps[0].abs());
    let (linear, trace) = match (kind, entries.len() > 1 && spread) {
        (_, false) => (None, None),
        (ConstantKind::Poincare, true) => (Some(linear_fit(&eps, &inv)), None),
        (ConstantKind::Stekloff, true) => (None, Some(fit_trace_law(&eps, &inv))),
    };
    Ok(ConstantSweepResult { kind, entries, linear, trace })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_fit_recovers_line() {
        let f = linear_fit(&[1.0, 2.0, 3.0], &[3.0, 5.0, 7.0]);
        assert!((f.slope - 2.0).abs() < 1e-14 && (f.intercept - 1.0).abs() < 1e-14);
        assert!((f.r_squared - 1.0).abs() < 1e-14);
    }

    #[test]
    fn trace_fit_is_exact_on_the_law() {
        let eps = [0.1, 0.05, 0.025];
        let y: Vec<f64> = eps.iter().map(|&e| 0.7 * trace_law(e)).collect();
        let f = fit_trace_law(&eps, &y);
        assert!((f.c - 0.7).abs() < 1e-12 && f.max_rel_residual < 1e-12);
    }

    #[test]
    fn coarse_disk_constant() {
        let s = poincare_section(0.0, 1.0, &MeshControls::poincare()).unwrap();
        let r = poincare_constant(&s).unwrap();
        assert!((r.constant - 0.2716).abs() < 0.02 * 0.2716, "{}", r.constant);
    }
}
