//! JSON description of a centerline network with per-curve radius profiles.

use serde::{Deserialize, Serialize};

use super::{CenterlineGraph, Curve, CurveEnd, EndpointRole, GeometryError, Radius, VesselGeometry};
use crate::vec3::Vec3;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "profile", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RadiusSpec {
    Constant { r: f64 },
    /// Linear from `r0` at the curve start to `r1` at its end.
    Linear { r0: f64, r1: f64 },
    SinusoidalPulsation { r0: f64, amplitude: f64, frequency: f64 },
}

impl RadiusSpec {
    pub fn build(&self, length: f64) -> Radius {
        match *self {
            RadiusSpec::Constant { r } => Radius::constant(r),
            RadiusSpec::Linear { r0, r1 } => Radius::linear(r0, r1, length),
            RadiusSpec::SinusoidalPulsation {
                r0,
                amplitude,
                frequency,
            } => Radius::pulsating(r0, amplitude, frequency),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSpec {
    pub points: Vec<Vec3>,
    pub radius: RadiusSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner_radius: Option<RadiusSpec>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum EndName {
    Start,
    End,
}

impl From<EndName> for CurveEnd {
    fn from(e: EndName) -> CurveEnd {
        match e {
            EndName::Start => CurveEnd::Start,
            EndName::End => CurveEnd::End,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSpec {
    pub curves: Vec<CurveSpec>,
    #[serde(default)]
    pub junctions: Vec<Vec<(usize, EndName)>>,
    #[serde(default)]
    pub inlets: Vec<(usize, EndName)>,
    #[serde(default)]
    pub outlets: Vec<(usize, EndName)>,
}

/// Loaded network: topology plus one geometry per curve.
#[derive(Debug, Clone)]
pub struct Network {
    pub graph: CenterlineGraph,
    pub geometries: Vec<VesselGeometry>,
}

fn reject_theta(value: &serde_json::Value, path: &str) -> Result<(), GeometryError> {
    match value {
        serde_json::Value::Object(map) => {
            for (k, v) in map {
                if k.to_ascii_lowercase().contains("theta") {
                    return Err(GeometryError::Json(format!(
                        "{path}.{k}: angle-dependent radii are not supported"
                    )));
                }
                reject_theta(v, &format!("{path}.{k}"))?;
            }
        }
        serde_json::Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                reject_theta(v, &format!("{path}[{i}]"))?;
            }
        }
        _ => {}
    }
    Ok(())
}

impl NetworkSpec {
    pub fn from_json(text: &str) -> Result<NetworkSpec, GeometryError> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| GeometryError::Json(e.to_string()))?;
        reject_theta(&value, "$")?;
        serde_json::from_value(value).map_err(|e| GeometryError::Json(e.to_string()))
    }

    pub fn build(&self) -> Result<Network, GeometryError> {
        let mut curves = Vec::with_capacity(self.curves.len());
        let mut geometries = Vec::with_capacity(self.curves.len());
        for c in &self.curves {
            let curve = Curve::new(c.points.clone())?;
            let outer = c.radius.build(curve.length());
            let geom = match &c.inner_radius {
                Some(inner) => VesselGeometry::annulus(inner.build(curve.length()), outer),
                None => VesselGeometry::cylinder(outer),
            };
            geom.radii(0.0, 0.0)?;
            geom.radii(curve.length(), 0.0)?;
            curves.push(curve);
            geometries.push(geom);
        }
        let junctions: Vec<Vec<(usize, CurveEnd)>> = self
            .junctions
            .iter()
            .map(|m| m.iter().map(|&(c, e)| (c, e.into())).collect())
            .collect();
        let tags: Vec<_> = self
            .inlets
            .iter()
            .map(|&(c, e)| ((c, e.into()), EndpointRole::Inlet))
            .chain(
                self.outlets
                    .iter()
                    .map(|&(c, e)| ((c, e.into()), EndpointRole::Outlet)),
            )
            .collect();
        let graph = CenterlineGraph::new(curves, &junctions, &tags)?;
        Ok(Network { graph, geometries })
    }
}

pub fn load_network(text: &str) -> Result<Network, GeometryError> {
    NetworkSpec::from_json(text)?.build()
}

#[cfg(test)]
mod tests {
    use super::*;

    const Y: &str = r#"{
        "curves": [
            {"points": [[0,0,0],[1,0,0]], "radius": {"profile": "constant", "r": 0.1}},
            {"points": [[1,0,0],[2,1,0]], "radius": {"profile": "linear", "r0": 0.08, "r1": 0.05}},
            {"points": [[1,0,0],[2,-1,0]], "radius": {"profile": "sinusoidal-pulsation", "r0": 0.07, "amplitude": 0.1, "frequency": 1.0}}
        ],
        "junctions": [[[0, "end"], [1, "start"], [2, "start"]]]
    }"#;

    #[test]
    fn loads_y_network() {
        let net = load_network(Y).unwrap();
        assert_eq!(net.graph.junctions().len(), 1);
        assert_eq!(net.graph.role(0, CurveEnd::Start), EndpointRole::Inlet);
        assert!(net.geometries[2].is_time_dependent());
        let r = net.geometries[1].outer.value(net.graph.curve(1).length(), 0.0);
        assert!((r - 0.05).abs() < 1e-15);
    }

    #[test]
    fn rejects_angle_dependence() {
        let text = r#"{"curves": [{"points": [[0,0,0],[1,0,0]],
            "radius": {"profile": "constant", "r": 0.1, "theta_amplitude": 0.2}}]}"#;
        let err = load_network(text).unwrap_err();
        assert!(err.to_string().contains("angle-dependent"));
    }

    #[test]
    fn rejects_unknown_profile() {
        let text = r#"{"curves": [{"points": [[0,0,0],[1,0,0]], "radius": {"profile": "cubic", "r": 0.1}}]}"#;
        assert!(load_network(text).is_err());
    }
}
