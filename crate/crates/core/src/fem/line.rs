use super::{FemError, ScalarField, VectorField};
use crate::geometry::{section_rule, CenterlineGraph, SectionMetrics, VesselGeometry};
use crate::linalg::{CsrMatrix, TripletBuilder};
use crate::mesh::LineMesh;
use crate::quadrature::gauss_interval;
use crate::vec3::{self, Vec3};

const SECTION_NR: usize = 4;
const SECTION_NTHETA: usize = 16;

/// Reduced (1D) problem data: centerlines, their mesh, and one geometry per
/// curve (a single entry is shared by all curves).
#[derive(Debug, Clone, Copy)]
pub struct Line1d<'a> {
    pub graph: &'a CenterlineGraph,
    pub mesh: &'a LineMesh,
    pub geoms: &'a [VesselGeometry],
}

impl<'a> Line1d<'a> {
    pub fn geometry(&self, curve: usize) -> &'a VesselGeometry {
        if self.geoms.len() == 1 {
            &self.geoms[0]
        } else {
            &self.geoms[curve]
        }
    }

    pub fn point(&self, curve: usize, s: f64) -> Vec3 {
        self.graph.curve(curve).position(s)
    }

    pub fn metrics(&self, curve: usize, s: f64, t: f64) -> Result<SectionMetrics, FemError> {
        Ok(self.geometry(curve).metrics(s, t)?)
    }

    /// Cross-section mean of `g` at (curve, s).
    pub fn section_mean(&self, curve: usize, s: f64, t: f64, g: impl Fn(Vec3) -> f64) -> Result<f64, FemError> {
        self.section_average(curve, s, t, false, g)
    }

    fn section_average(&self, curve: usize, s: f64, t: f64, shaped: bool, g: impl Fn(Vec3) -> f64) -> Result<f64, FemError> {
        let geom = self.geometry(curve);
        let (r1, r2) = geom.radii(s, t)?;
        let c = self.graph.curve(curve);
        let (center, frame) = (c.position(s), c.frame(s));
        let mut acc = 0.0;
        for (r, th, w) in section_rule(r1, r2, SECTION_NR, SECTION_NTHETA) {
            let shape = if shaped { geom.shape.eval(r, r1, r2) } else { 1.0 };
            acc += w * g(frame.circle_point(center, r, th)) * shape;
        }
        Ok(acc)
    }

    /// Mean axial velocity weighted by the shape profile, ⟨(u·T) w_c⟩.
    pub fn axial_velocity(&self, u: &VectorField, curve: usize, s: f64, t: f64) -> Result<f64, FemError> {
        let tangent = self.graph.curve(curve).frame(s).tangent;
        match u.constant_value() {
            Some(v) if self.geometry(curve).shape.is_uniform() => Ok(vec3::dot(v, tangent)),
            _ => self.section_average(curve, s, t, true, |x| vec3::dot(u.eval(x, t), tangent)),
        }
    }
}

/// Term selector for [`assemble_1d`].
#[derive(Debug, Clone, Copy)]
pub enum Term1d<'a> {
    /// `∫ A φ_j φ_i`
    MassA,
    /// `∫ ∂ₜA φ_j φ_i`
    MassDtA,
    /// `∫ ξ P φ_j φ_i`, optionally times the perimeter-averaged shape profile.
    Exchange { xi: &'a ScalarField, w_bar: bool },
    /// `∫ D A φ_j' φ_i'`
    Stiffness(&'a ScalarField),
    /// `∫ D 𝔤ₛ φ_j φ_i'`
    GsDrift(&'a ScalarField),
    /// `−∫ A ⟨u_s w_c⟩ φ_j φ_i'`
    Convection(&'a VectorField),
}

/// Integrand of a segment form: value at (curve, s, x) and which factors
/// (hat or derivative) enter for trial and test functions.
fn assemble_form<F>(line: &Line1d<'_>, trial_derivative: bool, test_derivative: bool, weight: F) -> Result<CsrMatrix, FemError>
where
    F: Fn(usize, f64, Vec3) -> Result<f64, FemError>,
{
    let n = line.mesh.num_vertices();
    let mut b = TripletBuilder::with_capacity(n, n, 4 * line.mesh.segments.len());
    for seg in &line.mesh.segments {
        let h = seg.length();
        let mut ke = [[0.0; 2]; 2];
        for (s, w) in gauss_interval(2, seg.s[0], seg.s[1]) {
            let val = weight(seg.curve, s, line.point(seg.curve, s))? * w;
            let xi = (s - seg.s[0]) / h;
            let phi = [1.0 - xi, xi];
            let dphi = [-1.0 / h, 1.0 / h];
            let trial = if trial_derivative { dphi } else { phi };
            let test = if test_derivative { dphi } else { phi };
            for i in 0..2 {
                for j in 0..2 {
                    ke[i][j] += val * test[i] * trial[j];
                }
            }
        }
        for i in 0..2 {
            for j in 0..2 {
                b.push(seg.vertices[i], seg.vertices[j], ke[i][j]);
            }
        }
    }
    Ok(b.build())
}

/// Assembles each requested reduced-model term at time `t`.
pub fn assemble_1d(line: &Line1d<'_>, terms: &[Term1d<'_>], t: f64) -> Result<Vec<CsrMatrix>, FemError> {
    terms
        .iter()
        .map(|term| match *term {
            Term1d::MassA => assemble_form(line, false, false, |c, s, _| Ok(line.metrics(c, s, t)?.area)),
            Term1d::MassDtA => assemble_form(line, false, false, |c, s, _| Ok(line.metrics(c, s, t)?.dt_area)),
            Term1d::Exchange { xi, w_bar } => assemble_form(line, false, false, |c, s, x| {
                let m = line.metrics(c, s, t)?;
                let w = if w_bar { line.geometry(c).w_bar(s, t)? } else { 1.0 };
                Ok(xi.eval(x, t) * m.perimeter * w)
            }),
            Term1d::Stiffness(d) => {
                assemble_form(line, true, true, |c, s, x| Ok(d.eval(x, t) * line.metrics(c, s, t)?.area))
            }
            Term1d::GsDrift(d) => {
                assemble_form(line, false, true, |c, s, x| Ok(d.eval(x, t) * line.geometry(c).gs(s, t)?))
            }
            Term1d::Convection(u) => assemble_form(line, false, true, |c, s, _| {
                Ok(-line.metrics(c, s, t)?.area * line.axial_velocity(u, c, s, t)?)
            }),
        })
        .collect()
}

/// Load vector `∫ A ⟨f⟩ φ_i`.
pub fn load_1d(line: &Line1d<'_>, f: &ScalarField, t: f64) -> Result<Vec<f64>, FemError> {
    let mut b = vec![0.0; line.mesh.num_vertices()];
    if f.is_zero() {
        return Ok(b);
    }
    for seg in &line.mesh.segments {
        let h = seg.length();
        for (s, w) in gauss_interval(2, seg.s[0], seg.s[1]) {
            let area = line.metrics(seg.curve, s, t)?.area;
            let mean = match f.constant_value() {
                Some(v) => v,
                None => line.section_mean(seg.curve, s, t, |x| f.eval(x, t))?,
            };
            let xi = (s - seg.s[0]) / h;
            b[seg.vertices[0]] += w * area * mean * (1.0 - xi);
            b[seg.vertices[1]] += w * area * mean * xi;
        }
    }
    Ok(b)
}

/// Lumped integral `∫ g(s) φ_i ds`-weighted sum `Σ_i (∫ A φ_i) x_i`, i.e.
/// the total solute `∫ A x ds` of a nodal field.
pub fn integral_a(line: &Line1d<'_>, x: &[f64], t: f64) -> Result<f64, FemError> {
    let m = assemble_1d(line, &[Term1d::MassA], t)?.remove(0);
    Ok(m.matvec(x).iter().sum())
}
