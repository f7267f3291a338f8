//! Centerlines, radius profiles and cross-section metrics.

mod centerline;
mod json;
mod vessel;

use thiserror::Error;

pub use centerline::{frenet_frames, CenterlineGraph, Curve, CurveEnd, EndpointRole, Frame, Junction};
pub use json::{load_network, CurveSpec, EndName, Network, NetworkSpec, RadiusSpec};
pub use vessel::{
    check_shape_profile, ConstantRadius, FnRadius, LinearRadius, PulsatingRadius, Radius,
    RadiusFunction, SectionMetrics, ShapeCheck, ShapeProfile, VesselGeometry,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("degenerate curve: {0}")]
    DegenerateCurve(String),
    #[error("invalid annulus at s={s}, t={t}: R1={r1}, R2={r2}")]
    InvalidAnnulus { s: f64, t: f64, r1: f64, r2: f64 },
    #[error("invalid network topology: {0}")]
    Topology(String),
    #[error("invalid centerline document: {0}")]
    Json(String),
}

/// Quadrature over a disk or annulus section: `(r, θ, weight)` triples with
/// Gauss points in r (weighted by r) and uniform angles. Weights are
/// normalized to sum to one, so the rule averages.
pub fn section_rule(r1: f64, r2: f64, n_r: usize, n_theta: usize) -> Vec<(f64, f64, f64)> {
    let radial = crate::quadrature::gauss_interval(n_r, r1, r2);
    let mut out = Vec::with_capacity(n_r * n_theta);
    for &(r, w) in &radial {
        for k in 0..n_theta {
            let th = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / n_theta as f64;
            out.push((r, th, w * r));
        }
    }
    let total: f64 = out.iter().map(|x| x.2).sum();
    out.iter_mut().for_each(|x| x.2 /= total);
    out
}
