use crate::vec3::{self, Vec3};

use super::GeometryError;

/// Orthonormal right-handed triple attached to a centerline sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub tangent: Vec3,
    pub normal: Vec3,
    pub binormal: Vec3,
}

impl Frame {
    /// Builds a frame from a tangent and an approximate normal; the normal is
    /// re-orthogonalized against the tangent.
    fn from_tangent_normal(tangent: Vec3, normal: Vec3) -> Option<Frame> {
        let t = vec3::normalize(tangent)?;
        let n = vec3::normalize(vec3::axpy(normal, -vec3::dot(normal, t), t))?;
        let b = vec3::cross(t, n);
        Some(Frame {
            tangent: t,
            normal: n,
            binormal: b,
        })
    }

    /// Point on the circle of radius `r` at angle `theta` in the (N, B) plane.
    pub fn circle_point(&self, center: Vec3, r: f64, theta: f64) -> Vec3 {
        let (sin, cos) = theta.sin_cos();
        vec3::add(
            center,
            vec3::add(vec3::scale(self.normal, r * cos), vec3::scale(self.binormal, r * sin)),
        )
    }
}

/// A vessel centerline represented as a polyline parametrized by arc length.
#[derive(Debug, Clone)]
pub struct Curve {
    points: Vec<Vec3>,
    arc: Vec<f64>,
    frames: Vec<Frame>,
}

impl Curve {
    pub fn new(points: Vec<Vec3>) -> Result<Curve, GeometryError> {
        let frames = frenet_frames(&points)?;
        let mut arc = Vec::with_capacity(points.len());
        let mut s = 0.0;
        arc.push(0.0);
        for w in points.windows(2) {
            s += vec3::dist(w[0], w[1]);
            arc.push(s);
        }
        Ok(Curve {
            points,
            arc,
            frames,
        })
    }

    /// Straight segment from `a` to `b`.
    pub fn straight(a: Vec3, b: Vec3) -> Result<Curve, GeometryError> {
        Curve::new(vec![a, b])
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    pub fn arc_lengths(&self) -> &[f64] {
        &self.arc
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn length(&self) -> f64 {
        *self.arc.last().unwrap()
    }

    pub fn start(&self) -> Vec3 {
        self.points[0]
    }

    pub fn end(&self) -> Vec3 {
        *self.points.last().unwrap()
    }

    /// Index of the polyline segment containing arc length `s` (clamped).
    fn segment_at(&self, s: f64) -> (usize, f64) {
        let n = self.points.len() - 1;
        let k = match self.arc.binary_search_by(|a| a.partial_cmp(&s).unwrap()) {
            Ok(i) => i.min(n - 1),
            Err(i) => i.saturating_sub(1).min(n - 1),
        };
        let len = self.arc[k + 1] - self.arc[k];
        let t = ((s - self.arc[k]) / len).clamp(0.0, 1.0);
        (k, t)
    }

    pub fn position(&self, s: f64) -> Vec3 {
        let (k, t) = self.segment_at(s);
        vec3::lerp(self.points[k], self.points[k + 1], t)
    }

    /// Frame at arc length `s`, interpolated between the vertex frames.
    pub fn frame(&self, s: f64) -> Frame {
        let (k, t) = self.segment_at(s);
        let (f0, f1) = (&self.frames[k], &self.frames[k + 1]);
        let tangent = vec3::lerp(f0.tangent, f1.tangent, t);
        let normal = vec3::lerp(f0.normal, f1.normal, t);
        Frame::from_tangent_normal(tangent, normal).unwrap_or(if t < 0.5 { *f0 } else { *f1 })
    }

    /// Closest point on the polyline: returns `(s, distance)`.
    pub fn project(&self, p: Vec3) -> (f64, f64) {
        let mut best = (0.0, f64::INFINITY);
        for k in 0..self.points.len() - 1 {
            let a = self.points[k];
            let d = vec3::sub(self.points[k + 1], a);
            let len2 = vec3::dot(d, d);
            let t = (vec3::dot(vec3::sub(p, a), d) / len2).clamp(0.0, 1.0);
            let q = vec3::axpy(a, t, d);
            let dist = vec3::dist(p, q);
            if dist < best.1 {
                best = (self.arc[k] + t * len2.sqrt(), dist);
            }
        }
        best
    }
}

fn circumcenter(a: Vec3, b: Vec3, c: Vec3) -> Option<(Vec3, Vec3)> {
    let ab = vec3::sub(b, a);
    let ac = vec3::sub(c, a);
    let n = vec3::cross(ab, ac);
    let n2 = vec3::dot(n, n);
    let scale = vec3::dot(ab, ab) * vec3::dot(ac, ac);
    if n2 <= 1e-24 * scale || n2 == 0.0 {
        return None;
    }
    // center = a + (|ac|^2 (n x ab) + |ab|^2 (ac x n)) / (2 |n|^2)
    let t1 = vec3::scale(vec3::cross(n, ab), vec3::dot(ac, ac));
    let t2 = vec3::scale(vec3::cross(ac, n), vec3::dot(ab, ab));
    let center = vec3::axpy(a, 0.5 / n2, vec3::add(t1, t2));
    Some((center, vec3::scale(n, 1.0 / n2.sqrt())))
}

fn any_perpendicular(t: Vec3) -> Vec3 {
    let mut axis = 0;
    for i in 1..3 {
        if t[i].abs() < t[axis].abs() {
            axis = i;
        }
    }
    let mut e = [0.0; 3];
    e[axis] = 1.0;
    vec3::axpy(e, -vec3::dot(e, t), t)
}

/// Per-vertex orthonormal frames of a polyline.
///
/// Where three consecutive samples are not collinear the Frenet frame of the
/// circle through them is used, so samples of a circle get exact normals.
/// On straight stretches the normal is carried over from the neighbouring
/// frame by rotation-minimizing transport.
pub fn frenet_frames(points: &[Vec3]) -> Result<Vec<Frame>, GeometryError> {
    let n = points.len();
    if n < 2 {
        return Err(GeometryError::DegenerateCurve("fewer than two vertices".into()));
    }
    let extent = points
        .iter()
        .map(|p| vec3::norm(*p))
        .fold(0.0_f64, f64::max)
        .max(1.0);
    for (k, w) in points.windows(2).enumerate() {
        if vec3::dist(w[0], w[1]) <= 1e-14 * extent {
            return Err(GeometryError::DegenerateCurve(format!(
                "zero-length segment {k}"
            )));
        }
    }

    let tangent = |i: usize| -> Vec3 {
        let d = if i == 0 {
            vec3::sub(points[1], points[0])
        } else if i == n - 1 {
            vec3::sub(points[n - 1], points[n - 2])
        } else {
            vec3::add(
                vec3::normalize(vec3::sub(points[i + 1], points[i])).unwrap(),
                vec3::normalize(vec3::sub(points[i], points[i - 1])).unwrap(),
            )
        };
        vec3::normalize(d).unwrap_or_else(|| vec3::normalize(vec3::sub(points[i.min(n - 2) + 1], points[i.min(n - 2)])).unwrap())
    };

    let curved: Vec<Option<Frame>> = (0..n)
        .map(|i| {
            if n < 3 {
                return None;
            }
            let j = i.clamp(1, n - 2);
            let (center, plane) = circumcenter(points[j - 1], points[j], points[j + 1])?;
            let radial = vec3::sub(points[i], center);
            let t = vec3::cross(plane, radial);
            Frame::from_tangent_normal(t, vec3::scale(radial, -1.0))
        })
        .collect();

    let transport = |prev: &Frame, i: usize| -> Frame {
        let t = tangent(i);
        Frame::from_tangent_normal(t, prev.normal)
            .or_else(|| Frame::from_tangent_normal(t, any_perpendicular(t)))
            .unwrap()
    };

    let mut frames: Vec<Option<Frame>> = vec![None; n];
    let first = curved.iter().position(|f| f.is_some());
    let start = first.unwrap_or(0);
    frames[start] = match curved[start] {
        Some(f) => Some(f),
        None => {
            let t = tangent(0);
            Frame::from_tangent_normal(t, any_perpendicular(t))
        }
    };
    for i in start + 1..n {
        frames[i] = Some(match curved[i] {
            Some(f) => f,
            None => transport(frames[i - 1].as_ref().unwrap(), i),
        });
    }
    for i in (0..start).rev() {
        frames[i] = Some(transport(frames[i + 1].as_ref().unwrap(), i));
    }
    Ok(frames.into_iter().map(|f| f.unwrap()).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CurveEnd {
    Start,
    End,
}

/// Role of a curve endpoint in the network.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EndpointRole {
    Junction(usize),
    Inlet,
    Outlet,
}

/// A bifurcation point shared by two or more curves.
#[derive(Debug, Clone)]
pub struct Junction {
    pub point: Vec3,
    /// Curves whose start (s = 0) lies at the junction.
    pub inlets: Vec<usize>,
    /// Curves whose end (s = L) lies at the junction.
    pub outlets: Vec<usize>,
}

impl Junction {
    pub fn degree(&self) -> usize {
        self.inlets.len() + self.outlets.len()
    }
}

/// Centerlines of a vessel network with junction topology.
#[derive(Debug, Clone)]
pub struct CenterlineGraph {
    curves: Vec<Curve>,
    junctions: Vec<Junction>,
    roles: Vec<[EndpointRole; 2]>,
}

impl CenterlineGraph {
    /// Single-curve network with a free inlet and outlet.
    pub fn single(curve: Curve) -> CenterlineGraph {
        CenterlineGraph {
            curves: vec![curve],
            junctions: Vec::new(),
            roles: vec![[EndpointRole::Inlet, EndpointRole::Outlet]],
        }
    }

    /// Builds a network from explicit junction member lists. Free endpoints
    /// default to inlet (curve start) or outlet (curve end) unless `tags`
    /// overrides them.
    pub fn new(
        curves: Vec<Curve>,
        junctions: &[Vec<(usize, CurveEnd)>],
        tags: &[((usize, CurveEnd), EndpointRole)],
    ) -> Result<CenterlineGraph, GeometryError> {
        let mut roles: Vec<[Option<EndpointRole>; 2]> = vec![[None, None]; curves.len()];
        let slot = |end: CurveEnd| match end {
            CurveEnd::Start => 0,
            CurveEnd::End => 1,
        };
        let scale = curves
            .iter()
            .flat_map(|c| c.points().iter())
            .map(|p| vec3::norm(*p))
            .fold(1.0_f64, f64::max);
        let mut out = Vec::with_capacity(junctions.len());
        for (j, members) in junctions.iter().enumerate() {
            if members.len() < 2 {
                return Err(GeometryError::Topology(format!(
                    "junction {j} has fewer than two members"
                )));
            }
            let mut junction = Junction {
                point: [0.0; 3],
                inlets: Vec::new(),
                outlets: Vec::new(),
            };
            for &(c, end) in members {
                let curve = curves.get(c).ok_or_else(|| {
                    GeometryError::Topology(format!("junction {j} references unknown curve {c}"))
                })?;
                let p = match end {
                    CurveEnd::Start => curve.start(),
                    CurveEnd::End => curve.end(),
                };
                if junction.degree() == 0 {
                    junction.point = p;
                } else if vec3::dist(p, junction.point) > 1e-10 * scale {
                    return Err(GeometryError::Topology(format!(
                        "junction {j}: endpoint of curve {c} does not coincide with the junction point"
                    )));
                }
                let r = &mut roles[c][slot(end)];
                if r.is_some() {
                    return Err(GeometryError::Topology(format!(
                        "endpoint {end:?} of curve {c} assigned more than one role"
                    )));
                }
                *r = Some(EndpointRole::Junction(j));
                match end {
                    CurveEnd::Start => junction.inlets.push(c),
                    CurveEnd::End => junction.outlets.push(c),
                }
            }
            out.push(junction);
        }
        for &((c, end), role) in tags {
            if matches!(role, EndpointRole::Junction(_)) {
                return Err(GeometryError::Topology("junction roles come from the junction list".into()));
            }
            let r = roles
                .get_mut(c)
                .ok_or_else(|| GeometryError::Topology(format!("tag references unknown curve {c}")))?;
            if r[slot(end)].is_some() {
                return Err(GeometryError::Topology(format!(
                    "endpoint {end:?} of curve {c} assigned more than one role"
                )));
            }
            r[slot(end)] = Some(role);
        }
        let roles = roles
            .into_iter()
            .map(|[a, b]| [a.unwrap_or(EndpointRole::Inlet), b.unwrap_or(EndpointRole::Outlet)])
            .collect();
        Ok(CenterlineGraph {
            curves,
            junctions: out,
            roles,
        })
    }

    /// Builds a network, joining curve endpoints that coincide within
    /// `1e-10` relative to the coordinate scale.
    pub fn from_curves(curves: Vec<Curve>) -> Result<CenterlineGraph, GeometryError> {
        let scale = curves
            .iter()
            .flat_map(|c| c.points().iter())
            .map(|p| vec3::norm(*p))
            .fold(1.0_f64, f64::max);
        let mut groups: Vec<(Vec3, Vec<(usize, CurveEnd)>)> = Vec::new();
        for (c, curve) in curves.iter().enumerate() {
            for (end, p) in [(CurveEnd::Start, curve.start()), (CurveEnd::End, curve.end())] {
                match groups
                    .iter_mut()
                    .find(|(q, _)| vec3::dist(*q, p) <= 1e-10 * scale)
                {
                    Some((_, members)) => members.push((c, end)),
                    None => groups.push((p, vec![(c, end)])),
                }
            }
        }
        let junctions: Vec<_> = groups
            .into_iter()
            .filter(|(_, m)| m.len() > 1)
            .map(|(_, m)| m)
            .collect();
        CenterlineGraph::new(curves, &junctions, &[])
    }

    pub fn curves(&self) -> &[Curve] {
        &self.curves
    }

    pub fn curve(&self, i: usize) -> &Curve {
        &self.curves[i]
    }

    pub fn junctions(&self) -> &[Junction] {
        &self.junctions
    }

    pub fn role(&self, curve: usize, end: CurveEnd) -> EndpointRole {
        self.roles[curve][match end {
            CurveEnd::Start => 0,
            CurveEnd::End => 1,
        }]
    }

    /// Nearest centerline point over all curves: `(curve, s, distance)`.
    /// Ties go to the lowest curve index.
    pub fn project(&self, p: Vec3) -> (usize, f64, f64) {
        let mut best = (0, 0.0, f64::INFINITY);
        for (c, curve) in self.curves.iter().enumerate() {
            let (s, d) = curve.project(p);
            if d < best.2 {
                best = (c, s, d);
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn check_orthonormal(f: &Frame) {
        let (t, n, b) = (f.tangent, f.normal, f.binormal);
        for v in [t, n, b] {
            assert!((vec3::norm(v) - 1.0).abs() < 1e-10);
        }
        assert!(vec3::dot(t, n).abs() < 1e-10);
        assert!(vec3::dot(t, b).abs() < 1e-10);
        assert!(vec3::dot(n, b).abs() < 1e-10);
        assert!((vec3::det3(t, n, b) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn straight_z_axis_has_constant_frame() {
        let pts: Vec<Vec3> = (0..5).map(|i| [0.0, 0.0, i as f64 * 0.25]).collect();
        let frames = frenet_frames(&pts).unwrap();
        for f in &frames {
            assert_eq!(f.tangent, [0.0, 0.0, 1.0]);
            assert_eq!(f.normal, frames[0].normal);
            assert_eq!(f.binormal, frames[0].binormal);
            check_orthonormal(f);
        }
    }

    #[test]
    fn circle_normals_point_to_center() {
        let rho = 1.0;
        let center = [0.0, 0.0, 0.0];
        let pts: Vec<Vec3> = (0..=16)
            .map(|i| {
                let th = 0.5 * PI * i as f64 / 16.0;
                [rho * th.cos(), rho * th.sin(), 0.0]
            })
            .collect();
        let frames = frenet_frames(&pts).unwrap();
        for (p, f) in pts.iter().zip(&frames) {
            let radial = vec3::scale(vec3::sub(*p, center), 1.0 / rho);
            assert!(vec3::norm(vec3::add(f.normal, radial)) < 1e-8);
            check_orthonormal(f);
        }
    }

    #[test]
    fn degenerate_segment_rejected() {
        let err = frenet_frames(&[[0.0; 3], [0.0; 3], [1.0, 0.0, 0.0]]).unwrap_err();
        assert!(err.to_string().contains("degenerate curve"));
    }

    #[test]
    fn straight_then_curved_is_continuous() {
        let mut pts: Vec<Vec3> = (0..4).map(|i| [i as f64 * 0.1 - 0.3, 0.0, 0.0]).collect();
        for i in 1..=8 {
            let th = 0.5 * PI * i as f64 / 8.0;
            pts.push([th.sin(), 1.0 - th.cos(), 0.0]);
        }
        let frames = frenet_frames(&pts).unwrap();
        for w in frames.windows(2) {
            check_orthonormal(&w[0]);
            assert!(vec3::dot(w[0].normal, w[1].normal) > 0.5);
        }
    }

    #[test]
    fn y_network_topology() {
        let a = Curve::straight([0.0, 0.0, 0.0], [1.0, 0.0, 0.0]).unwrap();
        let b = Curve::straight([1.0, 0.0, 0.0], [2.0, 1.0, 0.0]).unwrap();
        let c = Curve::straight([1.0, 0.0, 0.0], [2.0, -1.0, 0.0]).unwrap();
        let g = CenterlineGraph::from_curves(vec![a, b, c]).unwrap();
        assert_eq!(g.junctions().len(), 1);
        let j = &g.junctions()[0];
        assert_eq!(j.outlets, vec![0]);
        assert_eq!(j.inlets, vec![1, 2]);
        assert_eq!(g.role(0, CurveEnd::Start), EndpointRole::Inlet);
        assert_eq!(g.role(1, CurveEnd::End), EndpointRole::Outlet);
        assert_eq!(g.role(2, CurveEnd::Start), EndpointRole::Junction(0));
    }

    #[test]
    fn conflicting_roles_rejected() {
        let a = Curve::straight([0.0, 0.0, 0.0], [1.0, 0.0, 0.0]).unwrap();
        let b = Curve::straight([1.0, 0.0, 0.0], [2.0, 0.0, 0.0]).unwrap();
        let err = CenterlineGraph::new(
            vec![a, b],
            &[vec![(0, CurveEnd::End), (1, CurveEnd::Start)]],
            &[((1, CurveEnd::Start), EndpointRole::Inlet)],
        )
        .unwrap_err();
        assert!(matches!(err, GeometryError::Topology(_)));
    }

    #[test]
    fn projection_onto_polyline() {
        let c = Curve::new(vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0]]).unwrap();
        let (s, d) = c.project([0.4, 0.3, 0.0]);
        assert!((s - 0.4).abs() < 1e-14 && (d - 0.3).abs() < 1e-14);
        let (s, _) = c.project([1.5, 0.5, 0.0]);
        assert!((s - 1.5).abs() < 1e-14);
        assert!((c.length() - 2.0).abs() < 1e-15);
    }
}
