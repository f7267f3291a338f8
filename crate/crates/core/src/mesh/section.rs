use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{facet, region, MeshError, TriMesh};

/// Outer boundary of a cross-section.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "shape", content = "size")]
pub enum OuterShape {
    /// The section ends at r = R2.
    None,
    /// Disk of the given radius.
    Disk(f64),
    /// Square of the given half-width.
    Square(f64),
}

impl OuterShape {
    fn inner_extent(&self) -> Option<f64> {
        match *self {
            OuterShape::None => None,
            OuterShape::Disk(r) | OuterShape::Square(r) => Some(r),
        }
    }

    fn radius_at(&self, theta: f64) -> f64 {
        match *self {
            OuterShape::None => unreachable!(),
            OuterShape::Disk(r) => r,
            OuterShape::Square(a) => a / theta.cos().abs().max(theta.sin().abs()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectionParams {
    pub r1: f64,
    pub r2: f64,
    pub outer: OuterShape,
    /// Radial layers in the core disk and in the annulus R1 < r < R2.
    pub n_radial: usize,
    /// Vertices on the circles r = R1 and r = R2.
    pub n_azimuthal: usize,
    /// Graded rings between R2 and the outer boundary; derived from the
    /// azimuthal spacing when absent.
    pub n_outer: Option<usize>,
    /// Leave out the core disk r < R1.
    pub hole: bool,
}

impl SectionParams {
    pub fn new(r1: f64, r2: f64, outer: OuterShape, n_radial: usize, n_azimuthal: usize) -> Self {
        SectionParams {
            r1,
            r2,
            outer,
            n_radial,
            n_azimuthal,
            n_outer: None,
            hole: false,
        }
    }

    pub fn outer_rings(&self) -> usize {
        match self.outer.inner_extent() {
            None => 0,
            Some(extent) => self.n_outer.unwrap_or_else(|| {
                let growth = 1.0 + 2.0 * PI / self.n_azimuthal as f64;
                ((extent / self.r2).ln() / growth.ln()).ceil().max(1.0) as usize
            }),
        }
    }
}

struct Ring {
    ids: Vec<usize>,
    angles: Vec<f64>,
}

fn uniform_angles(n: usize) -> Vec<f64> {
    (0..n).map(|i| 2.0 * PI * i as f64 / n as f64).collect()
}

struct Builder {
    mesh: TriMesh,
}

impl Builder {
    fn ring(&mut self, angles: Vec<f64>, radius: impl Fn(f64) -> f64, marker: u8) -> Ring {
        let mut ids = Vec::with_capacity(angles.len());
        for &th in &angles {
            let r = radius(th);
            let (s, c) = th.sin_cos();
            ids.push(self.mesh.vertices.len());
            self.mesh.vertices.push([r * c, r * s]);
            self.mesh.vertex_rings.push(marker);
        }
        Ring { ids, angles }
    }

    fn mark_ring(&mut self, ring: &Ring, marker: u8) {
        let n = ring.ids.len();
        for k in 0..n {
            self.mesh.edges.push(([ring.ids[k], ring.ids[(k + 1) % n]], marker));
        }
    }

    fn push(&mut self, tri: [usize; 3], reg: u8) {
        self.mesh.triangles.push(tri);
        self.mesh.regions.push(reg);
        let t = self.mesh.triangles.len() - 1;
        if self.mesh.signed_area(t) < 0.0 {
            self.mesh.triangles[t].swap(1, 2);
        }
    }

    fn fan(&mut self, center: usize, ring: &Ring, reg: u8) {
        let n = ring.ids.len();
        for k in 0..n {
            self.push([center, ring.ids[k], ring.ids[(k + 1) % n]], reg);
        }
    }

    /// Triangulates the band between two closed rings by merging their angle
    /// sequences. Both rings must contain the angle 0.
    fn merge(&mut self, inner: &Ring, outer: &Ring, reg: u8) {
        let (m, n) = (inner.ids.len(), outer.ids.len());
        let angle = |r: &Ring, k: usize, len: usize| r.angles[k % len] + 2.0 * PI * (k / len) as f64;
        let (mut i, mut j) = (0, 0);
        while i < m || j < n {
            if j == n || (i < m && angle(inner, i + 1, m) <= angle(outer, j + 1, n)) {
                self.push([inner.ids[i % m], outer.ids[j % n], inner.ids[(i + 1) % m]], reg);
                i += 1;
            } else {
                self.push([inner.ids[i % m], outer.ids[j % n], outer.ids[(j + 1) % n]], reg);
                j += 1;
            }
        }
    }
}

/// Structured triangulation of a disk or annulus, optionally embedded in a
/// larger disk or square. Vertex rings lie exactly on r = R1 and r = R2.
pub fn build_section_triangulation(p: &SectionParams) -> Result<TriMesh, MeshError> {
    let bad = |msg: String| Err(MeshError::InvalidSection(msg));
    if !(p.r1 >= 0.0 && p.r2 > p.r1) {
        return bad(format!("radii out of order: R1={}, R2={}", p.r1, p.r2));
    }
    if let Some(extent) = p.outer.inner_extent() {
        if !(extent > p.r2) {
            return bad(format!("R2={} exceeds the outer extent {extent}", p.r2));
        }
    }
    if p.n_azimuthal < 8 || p.n_azimuthal % 2 != 0 {
        return bad(format!("n_azimuthal must be even and at least 8, got {}", p.n_azimuthal));
    }
    if p.n_radial == 0 {
        return bad("n_radial must be positive".into());
    }
    if p.hole && p.r1 == 0.0 {
        return bad("a hole requires R1 > 0".into());
    }
    let mut b = Builder {
        mesh: TriMesh {
            vertices: Vec::new(),
            triangles: Vec::new(),
            regions: Vec::new(),
            edges: Vec::new(),
            vertex_rings: Vec::new(),
        },
    };
    let naz = p.n_azimuthal;
    let annulus = p.r1 > 0.0;
    let core_radius = if annulus { p.r1 } else { p.r2 };
    let core_marker = if annulus { facet::GAMMA_V } else { facet::GAMMA_S };

    let mut last = if p.hole {
        let ring = b.ring(uniform_angles(naz), |_| p.r1, facet::INNER_WALL);
        b.mark_ring(&ring, facet::INNER_WALL);
        ring
    } else {
        b.mesh.vertices.push([0.0, 0.0]);
        b.mesh.vertex_rings.push(0);
        let center = 0;
        let mut prev: Option<Ring> = None;
        for j in 1..=p.n_radial {
            let count = if j == p.n_radial {
                naz
            } else {
                ((naz * j) as f64 / p.n_radial as f64).ceil().max(6.0) as usize
            };
            let r = core_radius * j as f64 / p.n_radial as f64;
            let marker = if j == p.n_radial { core_marker } else { 0 };
            let ring = b.ring(uniform_angles(count), |_| r, marker);
            match &prev {
                None => b.fan(center, &ring, region::VESSEL),
                Some(inner) => b.merge(inner, &ring, region::VESSEL),
            }
            prev = Some(ring);
        }
        let ring = prev.unwrap();
        b.mark_ring(&ring, core_marker);
        ring
    };

    if annulus {
        for k in 1..=p.n_radial {
            let r = p.r1 + (p.r2 - p.r1) * k as f64 / p.n_radial as f64;
            let marker = if k == p.n_radial { facet::GAMMA_S } else { 0 };
            let ring = b.ring(uniform_angles(naz), |_| r, marker);
            b.merge(&last, &ring, region::PVS);
            last = ring;
        }
        b.mark_ring(&last, facet::GAMMA_S);
    }

    let n_outer = p.outer_rings();
    if n_outer > 0 {
        let mut angles = uniform_angles(naz);
        if let OuterShape::Square(_) = p.outer {
            for k in 0..4 {
                let corner = PI / 4.0 + k as f64 * PI / 2.0;
                if angles.iter().all(|a| (a - corner).abs() > 1e-12) {
                    angles.push(corner);
                }
            }
            angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
        }
        for k in 1..=n_outer {
            let frac = k as f64 / n_outer as f64;
            let marker = if k == n_outer { facet::OUTER_BOUNDARY } else { 0 };
            let outer = p.outer;
            let ring = b.ring(angles.clone(), |th| p.r2 * (outer.radius_at(th) / p.r2).powf(frac), marker);
            b.merge(&last, &ring, region::SURROUNDINGS);
            last = ring;
        }
        if let OuterShape::Square(a) = p.outer {
            for &v in &last.ids {
                let q = &mut b.mesh.vertices[v];
                let axis = if q[0].abs() >= q[1].abs() { 0 } else { 1 };
                q[axis] = a.copysign(q[axis]);
                if (q[1 - axis].abs() - a).abs() < 1e-12 * a {
                    q[1 - axis] = a.copysign(q[1 - axis]);
                }
            }
        }
        b.mark_ring(&last, facet::OUTER_BOUNDARY);
    }
    Ok(b.mesh)
}
