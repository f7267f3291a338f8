use std::collections::HashMap;

use super::MeshError;
use crate::geometry::{CenterlineGraph, CurveEnd, EndpointRole};
use crate::vec3::{self, Vec3};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineVertex {
    pub point: Vec3,
    /// Curve that created the vertex (the lowest index at junctions).
    pub curve: usize,
    pub s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSegment {
    pub curve: usize,
    pub vertices: [usize; 2],
    /// Arc length of both ends on `curve`.
    pub s: [f64; 2],
}

impl LineSegment {
    pub fn length(&self) -> f64 {
        self.s[1] - self.s[0]
    }
}

/// P1 mesh of a centerline network. Junction endpoints share one vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct LineMesh {
    pub vertices: Vec<LineVertex>,
    pub segments: Vec<LineSegment>,
    /// Vertex indices along each curve, ordered by arc length.
    pub curve_vertices: Vec<Vec<usize>>,
    /// Arc length of each entry of `curve_vertices`.
    pub curve_s: Vec<Vec<f64>>,
}

impl LineMesh {
    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_curves(&self) -> usize {
        self.curve_vertices.len()
    }

    pub fn curve_length(&self, c: usize) -> f64 {
        self.segments
            .iter()
            .filter(|seg| seg.curve == c)
            .map(|seg| seg.length())
            .sum()
    }

    /// Number of segments incident to vertex `v`.
    pub fn incidence(&self, v: usize) -> usize {
        self.segments
            .iter()
            .map(|seg| seg.vertices.iter().filter(|&&x| x == v).count())
            .sum()
    }

    pub fn h_max(&self) -> f64 {
        self.segments.iter().map(|s| s.length()).fold(0.0, f64::max)
    }

    /// P1 interpolation of nodal `values` at arc length `s` on curve `c`.
    pub fn interpolate(&self, values: &[f64], c: usize, s: f64) -> f64 {
        let ss = &self.curve_s[c];
        let vs = &self.curve_vertices[c];
        let n = ss.len();
        let k = match ss.binary_search_by(|x| x.partial_cmp(&s).unwrap()) {
            Ok(i) => return values[vs[i]],
            Err(i) => i.clamp(1, n - 1) - 1,
        };
        let t = ((s - ss[k]) / (ss[k + 1] - ss[k])).clamp(0.0, 1.0);
        (1.0 - t) * values[vs[k]] + t * values[vs[k + 1]]
    }

    /// Total length of the network.
    pub fn length(&self) -> f64 {
        self.segments.iter().map(|s| s.length()).sum()
    }
}

/// Uniform subdivision of every curve with segments no longer than
/// `h_target`, measured in arc length.
pub fn build_line_mesh(graph: &CenterlineGraph, h_target: f64) -> Result<LineMesh, MeshError> {
    if !(h_target > 0.0) {
        return Err(MeshError::Invalid(format!("h_target must be positive, got {h_target}")));
    }
    let mut vertices: Vec<LineVertex> = Vec::new();
    let mut junction_vertex: HashMap<usize, usize> = HashMap::new();
    let mut segments = Vec::new();
    let mut curve_vertices = Vec::new();
    let mut curve_s = Vec::new();
    for (c, curve) in graph.curves().iter().enumerate() {
        let length = curve.length();
        let n = ((length / h_target) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        let mut ids = Vec::with_capacity(n + 1);
        let mut ss = Vec::with_capacity(n + 1);
        for k in 0..=n {
            let s = if k == n { length } else { length * k as f64 / n as f64 };
            let end = match k {
                0 => Some(CurveEnd::Start),
                _ if k == n => Some(CurveEnd::End),
                _ => None,
            };
            let junction = end.and_then(|e| match graph.role(c, e) {
                EndpointRole::Junction(j) => Some(j),
                _ => None,
            });
            let id = match junction.and_then(|j| junction_vertex.get(&j)) {
                Some(&id) => id,
                None => {
                    let point = match junction {
                        Some(j) => graph.junctions()[j].point,
                        None => curve.position(s),
                    };
                    vertices.push(LineVertex { point, curve: c, s });
                    if let Some(j) = junction {
                        junction_vertex.insert(j, vertices.len() - 1);
                    }
                    vertices.len() - 1
                }
            };
            ids.push(id);
            ss.push(s);
        }
        for k in 0..n {
            segments.push(LineSegment {
                curve: c,
                vertices: [ids[k], ids[k + 1]],
                s: [ss[k], ss[k + 1]],
            });
        }
        curve_vertices.push(ids);
        curve_s.push(ss);
    }
    debug_assert!(segments
        .iter()
        .all(|s| vec3::dist(vertices[s.vertices[0]].point, vertices[s.vertices[1]].point) > 0.0));
    Ok(LineMesh {
        vertices,
        segments,
        curve_vertices,
        curve_s,
    })
}
