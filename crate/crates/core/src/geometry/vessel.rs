use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use super::GeometryError;
use crate::quadrature::adaptive_simpson;

/// Radius profile R(s, t) of a vessel wall.
pub trait RadiusFunction: Send + Sync + fmt::Debug {
    fn value(&self, s: f64, t: f64) -> f64;

    fn d_ds(&self, _s: f64, _t: f64) -> Option<f64> {
        None
    }

    fn d_dt(&self, _s: f64, _t: f64) -> Option<f64> {
        None
    }

    fn is_time_dependent(&self) -> bool {
        true
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ConstantRadius(pub f64);

impl RadiusFunction for ConstantRadius {
    fn value(&self, _s: f64, _t: f64) -> f64 {
        self.0
    }
    fn d_ds(&self, _s: f64, _t: f64) -> Option<f64> {
        Some(0.0)
    }
    fn d_dt(&self, _s: f64, _t: f64) -> Option<f64> {
        Some(0.0)
    }
    fn is_time_dependent(&self) -> bool {
        false
    }
}

/// Linear taper from `r0` at s = 0 to `r1` at s = `length`.
#[derive(Debug, Clone, Copy)]
pub struct LinearRadius {
    pub r0: f64,
    pub r1: f64,
    pub length: f64,
}

impl RadiusFunction for LinearRadius {
    fn value(&self, s: f64, _t: f64) -> f64 {
        self.r0 + (self.r1 - self.r0) * s / self.length
    }
    fn d_ds(&self, _s: f64, _t: f64) -> Option<f64> {
        Some((self.r1 - self.r0) / self.length)
    }
    fn d_dt(&self, _s: f64, _t: f64) -> Option<f64> {
        Some(0.0)
    }
    fn is_time_dependent(&self) -> bool {
        false
    }
}

/// R(t) = r0 (1 + amplitude sin(2π frequency t)).
#[derive(Debug, Clone, Copy)]
pub struct PulsatingRadius {
    pub r0: f64,
    pub amplitude: f64,
    pub frequency: f64,
}

impl RadiusFunction for PulsatingRadius {
    fn value(&self, _s: f64, t: f64) -> f64 {
        self.r0 * (1.0 + self.amplitude * (2.0 * PI * self.frequency * t).sin())
    }
    fn d_ds(&self, _s: f64, _t: f64) -> Option<f64> {
        Some(0.0)
    }
    fn d_dt(&self, _s: f64, t: f64) -> Option<f64> {
        let w = 2.0 * PI * self.frequency;
        Some(self.r0 * self.amplitude * w * (w * t).cos())
    }
}

/// Closure-backed radius without analytic derivatives.
pub struct FnRadius<F> {
    f: F,
    time_dependent: bool,
}

impl<F> fmt::Debug for FnRadius<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnRadius")
            .field("time_dependent", &self.time_dependent)
            .finish()
    }
}

impl<F: Fn(f64, f64) -> f64 + Send + Sync> RadiusFunction for FnRadius<F> {
    fn value(&self, s: f64, t: f64) -> f64 {
        (self.f)(s, t)
    }
    fn is_time_dependent(&self) -> bool {
        self.time_dependent
    }
}

fn central_difference(f: impl Fn(f64) -> f64, x: f64) -> f64 {
    let h = 1e-6 * x.abs().max(1.0);
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Shared handle to a radius profile.
#[derive(Debug, Clone)]
pub struct Radius(Arc<dyn RadiusFunction>);

impl Radius {
    pub fn new<R: RadiusFunction + 'static>(r: R) -> Radius {
        Radius(Arc::new(r))
    }

    pub fn constant(r: f64) -> Radius {
        Radius::new(ConstantRadius(r))
    }

    pub fn linear(r0: f64, r1: f64, length: f64) -> Radius {
        Radius::new(LinearRadius { r0, r1, length })
    }

    pub fn pulsating(r0: f64, amplitude: f64, frequency: f64) -> Radius {
        Radius::new(PulsatingRadius {
            r0,
            amplitude,
            frequency,
        })
    }

    pub fn from_fn<F>(f: F, time_dependent: bool) -> Radius
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        Radius::new(FnRadius { f, time_dependent })
    }

    pub fn value(&self, s: f64, t: f64) -> f64 {
        self.0.value(s, t)
    }

    pub fn d_ds(&self, s: f64, t: f64) -> f64 {
        self.0
            .d_ds(s, t)
            .unwrap_or_else(|| central_difference(|x| self.0.value(x, t), s))
    }

    pub fn d_dt(&self, s: f64, t: f64) -> f64 {
        self.0
            .d_dt(s, t)
            .unwrap_or_else(|| central_difference(|x| self.0.value(s, x), t))
    }

    pub fn is_time_dependent(&self) -> bool {
        self.0.is_time_dependent()
    }
}

/// Radial profile w_c(r) of the concentration inside a section.
#[derive(Clone, Default)]
pub enum ShapeProfile {
    #[default]
    Uniform,
    /// Normalized Poiseuille (disk) or annular Poiseuille profile.
    Poiseuille,
    /// w(r, r1, r2); the caller is responsible for unit mean.
    Custom(Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for ShapeProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ShapeProfile::Uniform => write!(f, "Uniform"),
            ShapeProfile::Poiseuille => write!(f, "Poiseuille"),
            ShapeProfile::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl ShapeProfile {
    pub fn is_uniform(&self) -> bool {
        matches!(self, ShapeProfile::Uniform)
    }

    pub fn eval(&self, r: f64, r1: f64, r2: f64) -> f64 {
        match self {
            ShapeProfile::Uniform => 1.0,
            ShapeProfile::Poiseuille => {
                if r1 <= 0.0 {
                    2.0 * (1.0 - r * r / (r2 * r2))
                } else {
                    let (a, b) = (r1 * r1, r2 * r2);
                    let ln = (r2 / r1).ln();
                    let g = b - r * r + (b - a) * (r / r2).ln() / ln;
                    let mean = 0.5 * (b - a) - 0.5 * (b - a) / ln + a;
                    g / mean
                }
            }
            ShapeProfile::Custom(f) => f(r, r1, r2),
        }
    }
}

/// Cross-section quantities at one (s, t).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectionMetrics {
    pub r1: f64,
    pub r2: f64,
    pub area: f64,
    pub perimeter: f64,
    pub diameter: f64,
    pub dt_area: f64,
    pub ds_area: f64,
}

/// Vessel (or annular perivascular) geometry along one centerline.
#[derive(Debug, Clone)]
pub struct VesselGeometry {
    pub inner: Option<Radius>,
    pub outer: Radius,
    pub shape: ShapeProfile,
}

impl VesselGeometry {
    /// Solid vessel of radius `r`.
    pub fn cylinder(r: Radius) -> VesselGeometry {
        VesselGeometry {
            inner: None,
            outer: r,
            shape: ShapeProfile::Uniform,
        }
    }

    /// Annulus between `inner` and `outer`.
    pub fn annulus(inner: Radius, outer: Radius) -> VesselGeometry {
        VesselGeometry {
            inner: Some(inner),
            outer,
            shape: ShapeProfile::Uniform,
        }
    }

    pub fn with_shape(mut self, shape: ShapeProfile) -> VesselGeometry {
        self.shape = shape;
        self
    }

    pub fn is_time_dependent(&self) -> bool {
        self.outer.is_time_dependent()
            || self.inner.as_ref().is_some_and(|r| r.is_time_dependent())
    }

    pub fn radii(&self, s: f64, t: f64) -> Result<(f64, f64), GeometryError> {
        let r1 = self.inner.as_ref().map_or(0.0, |r| r.value(s, t));
        let r2 = self.outer.value(s, t);
        if !(r1 >= 0.0 && r2 > r1 && r2.is_finite()) {
            return Err(GeometryError::InvalidAnnulus { s, t, r1, r2 });
        }
        Ok((r1, r2))
    }

    pub fn metrics(&self, s: f64, t: f64) -> Result<SectionMetrics, GeometryError> {
        let (r1, r2) = self.radii(s, t)?;
        let (dt1, ds1) = match &self.inner {
            Some(r) => (r.d_dt(s, t), r.d_ds(s, t)),
            None => (0.0, 0.0),
        };
        let (dt2, ds2) = (self.outer.d_dt(s, t), self.outer.d_ds(s, t));
        Ok(SectionMetrics {
            r1,
            r2,
            area: PI * (r2 * r2 - r1 * r1),
            perimeter: 2.0 * PI * r2,
            diameter: 2.0 * r2,
            dt_area: 2.0 * PI * (r2 * dt2 - r1 * dt1),
            ds_area: 2.0 * PI * (r2 * ds2 - r1 * ds1),
        })
    }

    /// Drift coefficient of the reduced equation induced by radius variation
    /// combined with a non-uniform shape profile.
    pub fn gs(&self, s: f64, t: f64) -> Result<f64, GeometryError> {
        let (r1, r2) = self.radii(s, t)?;
        if self.shape.is_uniform() {
            return Ok(0.0);
        }
        let outer = PI * 2.0 * r2 * self.outer.d_ds(s, t) * (1.0 - self.shape.eval(r2, r1, r2));
        let inner = match &self.inner {
            Some(r) => PI * 2.0 * r1 * r.d_ds(s, t) * (1.0 - self.shape.eval(r1, r1, r2)),
            None => 0.0,
        };
        Ok(outer - inner)
    }

    /// Shape profile averaged over the outer perimeter.
    pub fn w_bar(&self, s: f64, t: f64) -> Result<f64, GeometryError> {
        let (r1, r2) = self.radii(s, t)?;
        Ok(self.shape.eval(r2, r1, r2))
    }
}

/// Result of [`check_shape_profile`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeCheck {
    pub mean: f64,
    pub pass: bool,
}

/// Section mean of a shape profile; passes when it equals one within 1e-8.
pub fn check_shape_profile(w: &ShapeProfile, r1: f64, r2: f64) -> ShapeCheck {
    let integral = adaptive_simpson(&|r: f64| w.eval(r, r1, r2) * r, r1, r2, 1e-14 * r2 * r2);
    let mean = 2.0 * integral / (r2 * r2 - r1 * r1);
    ShapeCheck {
        mean,
        pass: (mean - 1.0).abs() <= 1e-8,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disk_and_annulus_metrics() {
        let g = VesselGeometry::cylinder(Radius::constant(0.1));
        let m = g.metrics(0.3, 0.0).unwrap();
        assert!((m.area - PI * 0.01).abs() < 1e-15);
        assert!((m.perimeter - 0.2 * PI).abs() < 1e-15);
        assert_eq!(m.diameter, 0.2);
        let g = VesselGeometry::annulus(Radius::constant(0.05), Radius::constant(0.1));
        let m = g.metrics(0.0, 0.0).unwrap();
        assert!((m.area - 0.0075 * PI).abs() < 1e-15);
    }

    #[test]
    fn invalid_annulus() {
        let g = VesselGeometry::annulus(Radius::constant(0.1), Radius::constant(0.1));
        let err = g.metrics(0.0, 0.0).unwrap_err();
        assert!(err.to_string().contains("invalid annulus"));
    }

    #[test]
    fn pulsating_area_rate() {
        let g = VesselGeometry::cylinder(Radius::pulsating(0.1, 0.1, 1.0));
        let m = g.metrics(0.0, 0.0).unwrap();
        let expect = 2.0 * PI * 0.1 * (0.1 * 0.1 * 2.0 * PI);
        assert!((m.dt_area - expect).abs() < 1e-15);
        let area = |t: f64| g.metrics(0.0, t).unwrap().area;
        let h = 1e-5;
        let fd = (area(h) - area(-h)) / (2.0 * h);
        assert!((fd - m.dt_area).abs() <= 1e-6 * m.dt_area.abs() + 1e-10);
    }

    #[test]
    fn finite_difference_fallback() {
        let g = VesselGeometry::cylinder(Radius::from_fn(|s, t| 0.1 + 0.01 * s + 0.02 * t * t, true));
        let m = g.metrics(0.5, 0.5).unwrap();
        let r = 0.1 + 0.005 + 0.005;
        assert!((m.ds_area - 2.0 * PI * r * 0.01).abs() < 1e-9);
        assert!((m.dt_area - 2.0 * PI * r * 0.02).abs() < 1e-9);
    }

    #[test]
    fn gs_special_cases() {
        let tapered = VesselGeometry::cylinder(Radius::linear(0.1, 0.05, 1.0));
        assert_eq!(tapered.gs(0.5, 0.0).unwrap(), 0.0);
        let g = tapered.clone().with_shape(ShapeProfile::Custom(Arc::new(|_, _, _| 0.7)));
        let m = g.metrics(0.5, 0.0).unwrap();
        assert!((g.gs(0.5, 0.0).unwrap() - 0.3 * m.ds_area).abs() < 1e-15);
        let straight = VesselGeometry::annulus(Radius::constant(0.05), Radius::constant(0.1))
            .with_shape(ShapeProfile::Poiseuille);
        assert_eq!(straight.gs(0.2, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn shape_profile_means() {
        assert!(check_shape_profile(&ShapeProfile::Uniform, 0.0, 0.3).pass);
        let p = check_shape_profile(&ShapeProfile::Poiseuille, 0.0, 0.3);
        assert!(p.pass, "{}", p.mean);
        let p = check_shape_profile(&ShapeProfile::Poiseuille, 0.05, 0.1);
        assert!(p.pass, "{}", p.mean);
        let two = ShapeProfile::Custom(Arc::new(|_, _, _| 2.0));
        let c = check_shape_profile(&two, 0.0, 1.0);
        assert!(!c.pass && (c.mean - 2.0).abs() < 1e-12);
    }

    #[test]
    fn annular_poiseuille_vanishes_on_walls() {
        let w = ShapeProfile::Poiseuille;
        assert!(w.eval(0.05, 0.05, 0.1).abs() < 1e-14);
        assert!(w.eval(0.1, 0.05, 0.1).abs() < 1e-14);
    }
}
