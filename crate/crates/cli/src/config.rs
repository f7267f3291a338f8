//! Experiment configuration: a single JSON document, optionally patched with
//! `key=value` overrides.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;
use vasotrans_core::models::{SolverOptions, TimeDerivative};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Example1,
    Example2,
    Poincare,
    Stekloff,
    Convergence,
    Custom,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        ExperimentKind::Example1,
        ExperimentKind::Example2,
        ExperimentKind::Poincare,
        ExperimentKind::Stekloff,
        ExperimentKind::Convergence,
        ExperimentKind::Custom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Example1 => "example1",
            ExperimentKind::Example2 => "example2",
            ExperimentKind::Poincare => "poincare",
            ExperimentKind::Stekloff => "stekloff",
            ExperimentKind::Convergence => "convergence",
            ExperimentKind::Custom => "custom",
        }
    }

    pub fn parse(name: &str) -> Option<ExperimentKind> {
        ExperimentKind::ALL.into_iter().find(|k| k.name() == name)
    }

    pub fn describe(self) -> &'static str {
        match self {
            ExperimentKind::Example1 => "vessel in a cylinder: 3D-3D reference vs 3D-1D over a radius sweep",
            ExperimentKind::Example2 => "vessel and perivascular sheath in a box: 3D-3D-3D vs 3D-1D-1D",
            ExperimentKind::Poincare => "Poincare constants of disks and annuli",
            ExperimentKind::Stekloff => "trace constants of a thin vessel wall",
            ExperimentKind::Convergence => "manufactured-solution spatial and temporal convergence",
            ExperimentKind::Custom => "1D transport on a network read from a JSON file",
        }
    }
}

/// Coefficients of one subdomain: isotropic diffusion, constant velocity,
/// source and initial value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Coefficients {
    pub diffusion: f64,
    pub velocity: [f64; 3],
    pub source: f64,
    pub initial: f64,
}

impl Coefficients {
    pub const fn new(diffusion: f64, velocity: [f64; 3], source: f64, initial: f64) -> Coefficients {
        Coefficients { diffusion, velocity, source, initial }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsConfig {
    pub vessel: Coefficients,
    /// Perivascular space; used by example2 only.
    pub pvs: Coefficients,
    pub surroundings: Coefficients,
    /// Permeability of the vessel wall.
    pub xi_v: f64,
    /// Permeability of the perivascular sheath.
    pub xi_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    /// Vessel radii (example1, stekloff) or inner radii R1 (example2,
    /// poincare).
    pub radii: Vec<f64>,
    /// R2 / R1 for the perivascular sheath and the poincare annuli.
    pub outer_ratio: f64,
    /// Outer cylinder radius (example1) or half-width of the box (example2).
    pub outer_size: f64,
    pub length: f64,
    /// Network description for the custom experiment.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub network: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    pub n_radial: usize,
    pub n_azimuthal: usize,
    pub n_layers: usize,
    /// Target segment length of the centerline mesh; defaults to
    /// `length / n_layers`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_target: Option<f64>,
    /// Relative tolerance and refinement budget of the eigenvalue sweeps.
    pub tol: f64,
    pub max_refinements: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub tau: f64,
    pub t_end: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Write VTK snapshots every this many steps; 0 disables them.
    pub vtk_every: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub geometry: GeometryConfig,
    pub mesh: MeshConfig,
    pub physics: PhysicsConfig,
    pub time: TimeConfig,
    #[serde(default)]
    pub time_derivative: TimeDerivative,
    pub output: OutputConfig,
    #[serde(default)]
    pub solver: SolverOptions,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("invalid configuration:\n{}", .0.iter().map(|s| format!("  - {s}")).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<String>),
}

impl ExperimentConfig {
    /// Defaults of a named experiment.
    pub fn defaults(kind: ExperimentKind) -> ExperimentConfig {
        let physics = PhysicsConfig {
            vessel: Coefficients::new(1.0, [0.5, 0.0, 0.0], 0.5, 1.0),
            pvs: Coefficients::new(1.0, [0.1, 0.0, 0.0], 0.5, 0.0),
            surroundings: Coefficients::new(1.0, [0.1, 0.0, 0.0], 0.5, 0.0),
            xi_v: 1.0,
            xi_s: 1.0,
        };
        let mut cfg = ExperimentConfig {
            experiment: kind,
            geometry: GeometryConfig {
                radii: vec![0.1, 0.05, 0.025],
                outer_ratio: 2.0,
                outer_size: 0.5,
                length: 1.0,
                network: None,
            },
            mesh: MeshConfig { n_radial: 4, n_azimuthal: 32, n_layers: 40, h_target: None, tol: 1e-3, max_refinements: 0 },
            physics,
            time: TimeConfig { tau: 0.01, t_end: 0.2 },
            time_derivative: TimeDerivative::default(),
            output: OutputConfig { dir: PathBuf::from(format!("out/{}", kind.name())), vtk_every: 0 },
            solver: SolverOptions::default(),
        };
        match kind {
            ExperimentKind::Example1 => {}
            ExperimentKind::Example2 => {
                cfg.geometry.outer_size = 1.0;
                cfg.mesh.n_radial = 3;
                cfg.mesh.n_layers = 30;
                cfg.physics.surroundings.velocity = [0.05, 0.0, 0.0];
                cfg.time.t_end = 0.1;
            }
            ExperimentKind::Poincare => {
                cfg.geometry.radii = vec![0.0, 0.005, 0.05, 0.15, 0.25, 0.35, 0.45, 0.495];
                cfg.geometry.outer_size = 0.5;
                cfg.mesh = MeshConfig { n_radial: 8, n_azimuthal: 32, n_layers: 0, h_target: None, tol: 1e-3, max_refinements: 4 };
            }
            ExperimentKind::Stekloff => {
                cfg.geometry.radii = vec![0.2, 0.1, 0.05, 0.025];
                cfg.geometry.outer_size = 1.0;
                cfg.mesh = MeshConfig { n_radial: 2, n_azimuthal: 16, n_layers: 8, h_target: None, tol: 0.05, max_refinements: 2 };
            }
            ExperimentKind::Convergence => {
                cfg.mesh = MeshConfig { n_radial: 0, n_azimuthal: 0, n_layers: 32, h_target: None, tol: 0.0, max_refinements: 3 };
                cfg.time = TimeConfig { tau: 0.05, t_end: 0.4 };
            }
            ExperimentKind::Custom => {
                cfg.geometry.radii = vec![];
                cfg.mesh.n_layers = 20;
                cfg.time = TimeConfig { tau: 0.01, t_end: 0.1 };
            }
        }
        cfg
    }

    /// Parses a JSON document. Only `experiment` and `time.tau`/`time.t_end`
    /// are required; every other key falls back to the experiment defaults.
    pub fn from_json(text: &str, overrides: &[String]) -> Result<ExperimentConfig, ConfigError> {
        let mut value: Value =
            serde_json::from_str(text).map_err(|e| ConfigError::Invalid(vec![format!("malformed JSON: {e}")]))?;
        let mut issues = Vec::new();
        for o in overrides {
            if let Err(e) = apply_override(&mut value, o) {
                issues.push(e);
            }
        }
        for key in ["experiment", "time.tau", "time.t_end"] {
            if lookup(&value, key).is_none() {
                issues.push(format!("{key}: missing required field"));
            }
        }
        if !issues.is_empty() {
            return Err(ConfigError::Invalid(issues));
        }
        let kind = match value["experiment"].as_str().and_then(ExperimentKind::parse) {
            Some(k) => k,
            None => {
                return Err(ConfigError::Invalid(vec![format!(
                    "experiment: unknown experiment {}",
                    value["experiment"]
                )]))
            }
        };
        let mut merged = serde_json::to_value(ExperimentConfig::defaults(kind)).expect("defaults serialize");
        merge(&mut merged, value);
        let cfg: ExperimentConfig =
            serde_json::from_value(merged).map_err(|e| ConfigError::Invalid(vec![e.to_string()]))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_defaults(kind: ExperimentKind, overrides: &[String]) -> Result<ExperimentConfig, ConfigError> {
        let text = serde_json::to_string(&ExperimentConfig::defaults(kind)).expect("defaults serialize");
        ExperimentConfig::from_json(&text, overrides)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut issues = Vec::new();
        let mut check = |ok: bool, msg: String| {
            if !ok {
                issues.push(msg);
            }
        };
        let t = self.time;
        check(t.tau > 0.0 && t.tau.is_finite(), format!("time.tau: must be positive, got {}", t.tau));
        check(t.t_end >= 0.0 && t.t_end.is_finite(), format!("time.t_end: must be non-negative, got {}", t.t_end));
        if t.tau > 0.0 {
            let n = (t.t_end / t.tau).round();
            check(
                (n * t.tau - t.t_end).abs() <= 1e-9 * t.t_end.max(1.0),
                format!("time.t_end: {} is not a multiple of time.tau {}", t.t_end, t.tau),
            );
        }
        let g = &self.geometry;
        let needs_radii = !matches!(self.experiment, ExperimentKind::Convergence | ExperimentKind::Custom);
        check(!needs_radii || !g.radii.is_empty(), "geometry.radii: at least one radius is required".into());
        for (i, &r) in g.radii.iter().enumerate() {
            let lower_ok = if self.experiment == ExperimentKind::Poincare { r >= 0.0 } else { r > 0.0 };
            check(lower_ok && r.is_finite(), format!("geometry.radii[{i}]: invalid radius {r}"));
        }
        check(g.length > 0.0, format!("geometry.length: must be positive, got {}", g.length));
        check(g.outer_size > 0.0, format!("geometry.outer_size: must be positive, got {}", g.outer_size));
        match self.experiment {
            ExperimentKind::Example1 => {
                for (i, &r) in g.radii.iter().enumerate() {
                    check(r < g.outer_size, format!("geometry.radii[{i}]: {r} does not fit inside outer_size {}", g.outer_size));
                }
            }
            ExperimentKind::Example2 => {
                check(g.outer_ratio > 1.0, format!("geometry.outer_ratio: R2 must exceed R1, got ratio {}", g.outer_ratio));
                for (i, &r) in g.radii.iter().enumerate() {
                    check(
                        r * g.outer_ratio < g.outer_size,
                        format!("geometry.radii[{i}]: sheath radius {} does not fit inside the box", r * g.outer_ratio),
                    );
                }
            }
            ExperimentKind::Poincare => {
                for (i, &r) in g.radii.iter().enumerate() {
                    check(r < g.outer_size, format!("geometry.radii[{i}]: inner radius {r} must be below outer_size {}", g.outer_size));
                }
            }
            ExperimentKind::Stekloff => {
                for (i, &r) in g.radii.iter().enumerate() {
                    check(r < g.outer_size, format!("geometry.radii[{i}]: {r} does not fit inside outer_size {}", g.outer_size));
                }
            }
            ExperimentKind::Custom => check(g.network.is_some(), "geometry.network: path to a network JSON is required".into()),
            ExperimentKind::Convergence => {}
        }
        let m = self.mesh;
        match self.experiment {
            ExperimentKind::Convergence => {
                check(m.n_layers >= 2, format!("mesh.n_layers: finest box resolution must be at least 2, got {}", m.n_layers));
                check(m.max_refinements >= 2, "mesh.max_refinements: at least two refinements are needed for rates".into());
            }
            ExperimentKind::Custom => check(m.n_layers > 0, "mesh.n_layers: must be positive".into()),
            _ => {
                check(m.n_radial > 0, "mesh.n_radial: must be positive".into());
                check(m.n_azimuthal >= 3, format!("mesh.n_azimuthal: at least 3 required, got {}", m.n_azimuthal));
                if self.experiment != ExperimentKind::Poincare {
                    check(m.n_layers > 0, "mesh.n_layers: must be positive".into());
                }
            }
        }
        if let Some(h) = m.h_target {
            check(h > 0.0, format!("mesh.h_target: must be positive, got {h}"));
        }
        let p = &self.physics;
        for (name, c) in [("vessel", p.vessel), ("pvs", p.pvs), ("surroundings", p.surroundings)] {
            check(c.diffusion > 0.0, format!("physics.{name}.diffusion: must be positive, got {}", c.diffusion));
        }
        check(p.xi_v >= 0.0, format!("physics.xi_v: must be non-negative, got {}", p.xi_v));
        check(p.xi_s >= 0.0, format!("physics.xi_s: must be non-negative, got {}", p.xi_s));
        if issues.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Invalid(issues))
        }
    }
}

fn lookup<'a>(v: &'a Value, dotted: &str) -> Option<&'a Value> {
    dotted.split('.').try_fold(v, |v, k| v.get(k))
}

/// `a.b.c=value`; the value is parsed as JSON and taken as a string otherwise.
fn apply_override(root: &mut Value, item: &str) -> Result<(), String> {
    let (key, raw) = item.split_once('=').ok_or_else(|| format!("{item}: override must look like key=value"))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut cur = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let obj = cur.as_object_mut().ok_or_else(|| format!("{key}: {} is not an object", parts[..i].join(".")))?;
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        cur = obj.entry(part.to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    Err(format!("{item}: empty key"))
}

fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        for k in ExperimentKind::ALL {
            let cfg = ExperimentConfig::defaults(k);
            if k != ExperimentKind::Custom {
                cfg.validate().unwrap();
            }
        }
    }

    #[test]
    fn overrides_reach_nested_keys() {
        let cfg =
            ExperimentConfig::from_defaults(ExperimentKind::Example1, &["time.t_end=0.1".into(), "geometry.radii=[0.2]".into()])
                .unwrap();
        assert_eq!(cfg.time.t_end, 0.1);
        assert_eq!(cfg.geometry.radii, vec![0.2]);
    }

    #[test]
    fn missing_tau_is_named() {
        let err = ExperimentConfig::from_json(r#"{"experiment": "example1", "time": {"t_end": 0.2}}"#, &[]).unwrap_err();
        assert!(err.to_string().contains("time.tau"), "{err}");
    }

    #[test]
    fn issues_are_itemized() {
        let err = ExperimentConfig::from_defaults(
            ExperimentKind::Example2,
            &["time.tau=-1".into(), "geometry.outer_ratio=0.5".into()],
        )
        .unwrap_err();
        match err {
            ConfigError::Invalid(v) => assert!(v.len() >= 2, "{v:?}"),
            e => panic!("{e}"),
        }
    }
}
