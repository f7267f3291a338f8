//! Experiment pipelines.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;
use vasotrans_core::analysislab::{run_constant_sweep, AnalysisError, ConstantKind, MeshControls};
use vasotrans_core::fem::{Line1d, ScalarField};
use vasotrans_core::geometry::{load_network, CenterlineGraph, Curve, CurveEnd, EndpointRole, GeometryError, Radius, VesselGeometry};
use vasotrans_core::manufactured::{spatial_convergence, temporal_convergence, ConvergenceStudy};
use vasotrans_core::mesh::{
    build_line_mesh, build_section_triangulation, extrude, facet, region, Axis, Extrusion, LineMesh, MeshError,
    OuterShape, SectionParams, TetMesh,
};
use vasotrans_core::models::{
    compute_model_error, solve_1d_network, solve_3d1d, solve_3d1d1d, solve_reference_multidomain, Coupled3d1d,
    Coupled3d1d1d, Interface, LinePhysics, ModelError, ModelErrors, NetworkProblem, Physics, ReferenceProblem,
    ReferenceRegion, ReferenceSolution, TimeGrid, TransientSolution,
};

use crate::config::{Coefficients, ExperimentConfig, ExperimentKind};
use crate::output::{self, emit_1d, emit_3d, write_file, write_rate_table, OutputError, RateColumn};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("{context}: {source}")]
    Model { context: String, source: ModelError },
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Output(#[from] OutputError),
    #[error("cannot build worker pool: {0}")]
    Pool(String),
    #[error("{} of {total} runs failed; first: {}", .failures.len(), .failures[0])]
    Partial { total: usize, failures: Vec<String> },
}

fn model(context: impl Into<String>) -> impl FnOnce(ModelError) -> RunError {
    let context = context.into();
    move |source| RunError::Model { context, source }
}

/// Mesh size bounds per region.
#[derive(Debug, Clone, Serialize)]
pub struct MeshStats {
    pub vertices: usize,
    pub cells: usize,
    pub h: BTreeMap<String, (f64, f64)>,
    pub line_vertices: usize,
}

fn mesh_stats(mesh: &TetMesh, line: &LineMesh) -> MeshStats {
    let names = [(region::VESSEL, "vessel"), (region::PVS, "pvs"), (region::SURROUNDINGS, "surroundings")];
    let h = names
        .iter()
        .filter(|(r, _)| mesh.regions.contains(r))
        .map(|&(r, n)| (n.to_string(), mesh.mesh_size(Some(r))))
        .collect();
    MeshStats { vertices: mesh.num_vertices(), cells: mesh.num_cells(), h, line_vertices: line.num_vertices() }
}

/// Outcome of one radius of a model-error sweep.
#[derive(Debug, Clone, Serialize)]
pub struct RadiusRecord {
    pub radius: f64,
    pub mesh: MeshStats,
    pub errors: ModelErrors,
    pub reference_iterations: usize,
    pub reduced_iterations: usize,
    pub seconds: f64,
}

/// Files written and a JSON summary of the run.
#[derive(Debug, Clone, Default)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
    pub summary: Value,
}

/// Worker count from `VASOTRANS_THREADS`; 0 lets the pool decide.
pub fn thread_count() -> usize {
    std::env::var("VASOTRANS_THREADS").ok().and_then(|v| v.parse().ok()).unwrap_or(0)
}

/// Runs the configured experiment inside a bounded worker pool and always
/// writes `manifest.json` to the output directory, also on failure.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunReport, RunError> {
    let dir = cfg.output.dir.clone();
    output::create_dir(&dir)?;
    let start = Instant::now();
    let threads = thread_count();
    let result = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| RunError::Pool(e.to_string()))
        .and_then(|pool| pool.install(|| dispatch(cfg, &dir)));
    let (status, error, report) = match &result {
        Ok(r) => ("ok", Value::Null, r.clone()),
        Err(e) => ("failed", json!(e.to_string()), RunReport::default()),
    };
    let manifest = json!({
        "status": status,
        "error": error,
        "config": cfg,
        "threads": threads,
        "seconds": start.elapsed().as_secs_f64(),
        "summary": report.summary,
        "files": report.files,
        "version": env!("CARGO_PKG_VERSION"),
    });
    let path = dir.join("manifest.json");
    write_file(&path, |w| {
        serde_json::to_writer_pretty(&mut *w, &manifest)?;
        writeln!(w)
    })?;
    result.map(|mut r| {
        r.files.push(path);
        r
    })
}

fn dispatch(cfg: &ExperimentConfig, dir: &Path) -> Result<RunReport, RunError> {
    match cfg.experiment {
        ExperimentKind::Example1 => radius_sweep(cfg, dir, run_example1),
        ExperimentKind::Example2 => radius_sweep(cfg, dir, run_example2),
        ExperimentKind::Poincare | ExperimentKind::Stekloff => constant_sweep(cfg, dir),
        ExperimentKind::Convergence => convergence(cfg, dir),
        ExperimentKind::Custom => custom(cfg, dir),
    }
}

type RadiusRun = fn(&ExperimentConfig, f64, &Path) -> Result<(RadiusRecord, Vec<PathBuf>), RunError>;

/// Independent per-radius runs on the worker pool, written to disjoint
/// subdirectories; tables are assembled in schedule order.
fn radius_sweep(cfg: &ExperimentConfig, dir: &Path, run: RadiusRun) -> Result<RunReport, RunError> {
    let results: Vec<Result<(RadiusRecord, Vec<PathBuf>), RunError>> = cfg
        .geometry
        .radii
        .par_iter()
        .enumerate()
        .map(|(i, &r)| {
            let sub = dir.join(format!("radius_{i}"));
            if cfg.output.vtk_every > 0 {
                output::create_dir(&sub)?;
            }
            run(cfg, r, &sub)
        })
        .collect();
    let mut records = Vec::new();
    let mut files = Vec::new();
    let mut failures = Vec::new();
    for (r, res) in cfg.geometry.radii.iter().zip(results) {
        match res {
            Ok((rec, f)) => {
                records.push(rec);
                files.extend(f);
            }
            Err(e) => failures.push(format!("R = {r}: {e}")),
        }
    }
    files.extend(write_error_tables(cfg.experiment, dir, &records)?);
    let report = RunReport { files, summary: json!({ "runs": records, "failures": failures }) };
    if failures.is_empty() {
        Ok(report)
    } else {
        Err(RunError::Partial { total: cfg.geometry.radii.len(), failures })
    }
}

fn write_error_tables(kind: ExperimentKind, dir: &Path, records: &[RadiusRecord]) -> Result<Vec<PathBuf>, RunError> {
    let radii: Vec<f64> = records.iter().map(|r| r.radius).collect();
    let col = |f: fn(&ModelErrors) -> f64| records.iter().map(|r| f(&r.errors)).collect::<Vec<f64>>();
    let (ev, etv, es) = (col(|e| e.e_v), col(|e| e.etilde_v), col(|e| e.e_s));
    let mut files = Vec::new();
    if kind == ExperimentKind::Example1 {
        files.push(write_rate_table(
            &dir.join("errors.csv"),
            "R",
            &radii,
            &[
                RateColumn { name: "E_v", rate: "rate_Ev", values: &ev },
                RateColumn { name: "Etilde_v", rate: "rate", values: &etv },
                RateColumn { name: "E_s", rate: "rate_Es", values: &es },
            ],
        )?);
    } else {
        let ep = col(|e| e.e_p.unwrap_or(f64::NAN));
        let etp = col(|e| e.etilde_p.unwrap_or(f64::NAN));
        files.push(write_rate_table(
            &dir.join("errors_vessel_pvs.csv"),
            "R1",
            &radii,
            &[
                RateColumn { name: "E_v", rate: "rate_Ev", values: &ev },
                RateColumn { name: "Etilde_v", rate: "rate", values: &etv },
                RateColumn { name: "E_p", rate: "rate_Ep", values: &ep },
                RateColumn { name: "Etilde_p", rate: "rate", values: &etp },
            ],
        )?);
        files.push(write_rate_table(
            &dir.join("errors_surroundings.csv"),
            "R1",
            &radii,
            &[RateColumn { name: "E_s", rate: "rate_Es", values: &es }],
        )?);
    }
    Ok(files)
}

fn physics(c: &Coefficients) -> Physics {
    Physics::new(c.diffusion, c.velocity, c.source, c.initial)
}

fn line_physics(c: &Coefficients) -> LinePhysics {
    LinePhysics::new(c.diffusion, c.velocity, c.source, c.initial)
}

fn h_target(cfg: &ExperimentConfig) -> f64 {
    cfg.mesh.h_target.unwrap_or(cfg.geometry.length / cfg.mesh.n_layers as f64)
}

/// Vessel of radius `r` along the x axis inside a cylinder; the tissue end
/// caps join the lateral boundary as the zero-concentration boundary.
pub fn example1_mesh(cfg: &ExperimentConfig, r: f64) -> Result<TetMesh, MeshError> {
    let m = cfg.mesh;
    let sec = build_section_triangulation(&SectionParams::new(
        0.0,
        r,
        OuterShape::Disk(cfg.geometry.outer_size),
        m.n_radial,
        m.n_azimuthal,
    ))?;
    let mut mesh = extrude(&sec, &Extrusion::new(cfg.geometry.length, m.n_layers).along(Axis::X, [0.0; 3]))?;
    mesh.relabel_facets(&[facet::END_S0, facet::END_SL], region::SURROUNDINGS, facet::OUTER_BOUNDARY);
    Ok(mesh)
}

/// Vessel of radius `r1` with a sheath of radius `outer_ratio·r1` along the
/// z axis through a box centred at the origin.
pub fn example2_mesh(cfg: &ExperimentConfig, r1: f64) -> Result<TetMesh, MeshError> {
    let (m, g) = (cfg.mesh, &cfg.geometry);
    let sec = build_section_triangulation(&SectionParams::new(
        r1,
        g.outer_ratio * r1,
        OuterShape::Square(g.outer_size),
        m.n_radial,
        m.n_azimuthal,
    ))?;
    let origin = [0.0, 0.0, -0.5 * g.length];
    let mut mesh = extrude(&sec, &Extrusion::new(g.length, m.n_layers).along(Axis::Z, origin))?;
    mesh.relabel_facets(&[facet::END_S0, facet::END_SL], region::SURROUNDINGS, facet::OUTER_BOUNDARY);
    Ok(mesh)
}

pub fn example1_centerline(cfg: &ExperimentConfig) -> Result<CenterlineGraph, GeometryError> {
    Ok(CenterlineGraph::single(Curve::straight([0.0; 3], [cfg.geometry.length, 0.0, 0.0])?))
}

pub fn example2_centerline(cfg: &ExperimentConfig) -> Result<CenterlineGraph, GeometryError> {
    let half = 0.5 * cfg.geometry.length;
    Ok(CenterlineGraph::single(Curve::straight([0.0, 0.0, -half], [0.0, 0.0, half])?))
}

fn time(cfg: &ExperimentConfig) -> TimeGrid {
    TimeGrid::new(cfg.time.tau, cfg.time.t_end)
}

pub fn example1_reference(cfg: &ExperimentConfig, mesh: &TetMesh) -> Result<ReferenceSolution, ModelError> {
    let p = &cfg.physics;
    solve_reference_multidomain(&ReferenceProblem {
        mesh,
        regions: vec![
            ReferenceRegion { region: region::VESSEL, name: "c_v".into(), physics: physics(&p.vessel) },
            ReferenceRegion { region: region::SURROUNDINGS, name: "c_s".into(), physics: physics(&p.surroundings) },
        ],
        interfaces: vec![Interface { regions: (region::VESSEL, region::SURROUNDINGS), xi: ScalarField::Constant(p.xi_v) }],
        dirichlet: vec![facet::OUTER_BOUNDARY],
        time: time(cfg),
        solver: cfg.solver,
    })
}

pub fn example1_reduced(
    cfg: &ExperimentConfig,
    mesh: &TetMesh,
    graph: &CenterlineGraph,
    line: &LineMesh,
    r: f64,
) -> Result<TransientSolution, ModelError> {
    let p = &cfg.physics;
    let geoms = [VesselGeometry::cylinder(Radius::constant(r))];
    solve_3d1d(&Coupled3d1d {
        mesh,
        tissue: physics(&p.surroundings),
        line: Line1d { graph, mesh: line, geoms: &geoms },
        vessel: line_physics(&p.vessel),
        xi: ScalarField::Constant(p.xi_v),
        dirichlet: vec![facet::OUTER_BOUNDARY],
        time: time(cfg),
        n_quad: None,
        time_derivative: cfg.time_derivative,
        solver: cfg.solver,
    })
}

pub fn example2_reference(cfg: &ExperimentConfig, mesh: &TetMesh) -> Result<ReferenceSolution, ModelError> {
    let p = &cfg.physics;
    solve_reference_multidomain(&ReferenceProblem {
        mesh,
        regions: vec![
            ReferenceRegion { region: region::VESSEL, name: "c_v".into(), physics: physics(&p.vessel) },
            ReferenceRegion { region: region::PVS, name: "c_p".into(), physics: physics(&p.pvs) },
            ReferenceRegion { region: region::SURROUNDINGS, name: "c_s".into(), physics: physics(&p.surroundings) },
        ],
        interfaces: vec![
            Interface { regions: (region::VESSEL, region::PVS), xi: ScalarField::Constant(p.xi_v) },
            Interface { regions: (region::PVS, region::SURROUNDINGS), xi: ScalarField::Constant(p.xi_s) },
        ],
        dirichlet: vec![facet::OUTER_BOUNDARY],
        time: time(cfg),
        solver: cfg.solver,
    })
}

pub fn example2_reduced(
    cfg: &ExperimentConfig,
    mesh: &TetMesh,
    graph: &CenterlineGraph,
    line: &LineMesh,
    r1: f64,
) -> Result<TransientSolution, ModelError> {
    let p = &cfg.physics;
    let r2 = cfg.geometry.outer_ratio * r1;
    solve_3d1d1d(&Coupled3d1d1d {
        mesh,
        tissue: physics(&p.surroundings),
        graph,
        line_mesh: line,
        vessel_geometry: vec![VesselGeometry::cylinder(Radius::constant(r1))],
        pvs_geometry: vec![VesselGeometry::annulus(Radius::constant(r1), Radius::constant(r2))],
        vessel: line_physics(&p.vessel),
        pvs: line_physics(&p.pvs),
        xi_v: ScalarField::Constant(p.xi_v),
        xi_s: ScalarField::Constant(p.xi_s),
        dirichlet: vec![facet::OUTER_BOUNDARY],
        time: time(cfg),
        n_quad: None,
        time_derivative: cfg.time_derivative,
        solver: cfg.solver,
    })
}

fn run_example1(cfg: &ExperimentConfig, r: f64, dir: &Path) -> Result<(RadiusRecord, Vec<PathBuf>), RunError> {
    let start = Instant::now();
    let mesh = example1_mesh(cfg, r)?;
    let graph = example1_centerline(cfg)?;
    let line = build_line_mesh(&graph, h_target(cfg))?;
    let reference = example1_reference(cfg, &mesh).map_err(model(format!("reference solve, R = {r}")))?;
    let reduced = example1_reduced(cfg, &mesh, &graph, &line, r).map_err(model(format!("3D-1D solve, R = {r}")))?;
    let errors = compute_model_error(&reference, &reduced, &mesh, &graph, &line).map_err(model("model error"))?;
    let mut files = Vec::new();
    let every = cfg.output.vtk_every;
    if every > 0 {
        let sub = |n: &str| reference.submesh(n).map_err(model("submesh"));
        files.extend(emit_3d(dir, "c_v", sub("c_v")?, &reference.solution, every)?);
        files.extend(emit_3d(dir, "c_s", sub("c_s")?, &reference.solution, every)?);
        files.extend(emit_3d(dir, "c", &mesh, &reduced, every)?);
        files.extend(emit_1d(dir, "chat", &graph, &line, Some(sub("c_v")?), &reduced, every)?);
    }
    let record = RadiusRecord {
        radius: r,
        mesh: mesh_stats(&mesh, &line),
        errors,
        reference_iterations: reference.solution.iterations.iter().sum(),
        reduced_iterations: reduced.iterations.iter().sum(),
        seconds: start.elapsed().as_secs_f64(),
    };
    Ok((record, files))
}

fn run_example2(cfg: &ExperimentConfig, r1: f64, dir: &Path) -> Result<(RadiusRecord, Vec<PathBuf>), RunError> {
    let start = Instant::now();
    let mesh = example2_mesh(cfg, r1)?;
    let graph = example2_centerline(cfg)?;
    let line = build_line_mesh(&graph, h_target(cfg))?;
    let reference = example2_reference(cfg, &mesh).map_err(model(format!("reference solve, R1 = {r1}")))?;
    let reduced = example2_reduced(cfg, &mesh, &graph, &line, r1).map_err(model(format!("3D-1D-1D solve, R1 = {r1}")))?;
    let errors = compute_model_error(&reference, &reduced, &mesh, &graph, &line).map_err(model("model error"))?;
    let mut files = Vec::new();
    let every = cfg.output.vtk_every;
    if every > 0 {
        let sub = |n: &str| reference.submesh(n).map_err(model("submesh"));
        for f in ["c_v", "c_p", "c_s"] {
            files.extend(emit_3d(dir, f, sub(f)?, &reference.solution, every)?);
        }
        files.extend(emit_3d(dir, "c", &mesh, &reduced, every)?);
        files.extend(emit_1d(dir, "chat_v", &graph, &line, Some(sub("c_v")?), &reduced, every)?);
        files.extend(emit_1d(dir, "chat_p", &graph, &line, Some(sub("c_p")?), &reduced, every)?);
    }
    let record = RadiusRecord {
        radius: r1,
        mesh: mesh_stats(&mesh, &line),
        errors,
        reference_iterations: reference.solution.iterations.iter().sum(),
        reduced_iterations: reduced.iterations.iter().sum(),
        seconds: start.elapsed().as_secs_f64(),
    };
    Ok((record, files))
}

pub fn mesh_controls(cfg: &ExperimentConfig) -> MeshControls {
    let m = cfg.mesh;
    MeshControls {
        n_radial: m.n_radial,
        n_azimuthal: m.n_azimuthal,
        n_layers: m.n_layers,
        outer_radius: cfg.geometry.outer_size,
        length: cfg.geometry.length,
        tol: m.tol,
        max_refinements: m.max_refinements,
    }
}

fn constant_sweep(cfg: &ExperimentConfig, dir: &Path) -> Result<RunReport, RunError> {
    let (kind, schedule): (ConstantKind, Vec<(f64, f64)>) = match cfg.experiment {
        ExperimentKind::Poincare => {
            (ConstantKind::Poincare, cfg.geometry.radii.iter().map(|&r| (r, cfg.geometry.outer_size)).collect())
        }
        _ => (ConstantKind::Stekloff, cfg.geometry.radii.iter().map(|&r| (0.0, r)).collect()),
    };
    let result = run_constant_sweep(kind, &schedule, &mesh_controls(cfg))?;
    let path = write_file(&dir.join("constants.csv"), |w| result.write_csv(w))?;
    Ok(RunReport { files: vec![path], summary: serde_json::to_value(&result).expect("serializable") })
}

fn convergence(cfg: &ExperimentConfig, dir: &Path) -> Result<RunReport, RunError> {
    let finest = cfg.mesh.n_layers;
    let k = cfg.mesh.max_refinements;
    let ns: Vec<usize> = (0..=k).rev().map(|i| (finest >> i).max(1)).collect();
    let taus: Vec<f64> = (0..=k).map(|i| cfg.time.tau / (1u32 << i) as f64).collect();
    let spatial = spatial_convergence(&ns, cfg.time.tau, cfg.time.t_end).map_err(model("spatial study"))?;
    let temporal = temporal_convergence((finest / 4).max(2), &taus, cfg.time.t_end).map_err(model("temporal study"))?;
    let table = |name: &str, step: &str, s: &ConvergenceStudy| {
        write_rate_table(&dir.join(name), step, &s.steps, &[RateColumn { name: "E", rate: "rate", values: &s.errors }])
    };
    let files = vec![table("spatial.csv", "h", &spatial)?, table("temporal.csv", "tau", &temporal)?];
    Ok(RunReport { files, summary: json!({ "spatial": spatial, "temporal": temporal }) })
}

/// 1D transport on a network file: the vessel coefficients apply on every
/// curve and inlets hold the vessel initial value.
fn custom(cfg: &ExperimentConfig, dir: &Path) -> Result<RunReport, RunError> {
    let path = cfg.geometry.network.as_ref().expect("validated");
    let text = fs::read_to_string(path).map_err(|source| OutputError { path: path.clone(), source })?;
    let net = load_network(&text)?;
    let line = build_line_mesh(&net.graph, h_target(cfg))?;
    let c = cfg.physics.vessel;
    let mut dirichlet = Vec::new();
    for (k, verts) in line.curve_vertices.iter().enumerate() {
        for (end, v) in [(CurveEnd::Start, verts[0]), (CurveEnd::End, *verts.last().expect("non-empty curve"))] {
            if net.graph.role(k, end) == EndpointRole::Inlet {
                dirichlet.push((v, c.initial));
            }
        }
    }
    let sol = solve_1d_network(&NetworkProblem {
        line: Line1d { graph: &net.graph, mesh: &line, geoms: &net.geometries },
        physics: line_physics(&c),
        exterior: None,
        dirichlet,
        time: time(cfg),
        time_derivative: cfg.time_derivative,
        solver: cfg.solver,
    })
    .map_err(model("network solve"))?;
    let last = sol.last("chat").map_err(model("network solve"))?;
    let csv = write_file(&dir.join("network.csv"), |w| {
        writeln!(w, "curve,s,x,y,z,chat")?;
        for (v, val) in line.vertices.iter().zip(last) {
            let p = v.point;
            writeln!(w, "{},{},{},{},{},{}", v.curve, output::num(v.s), output::num(p[0]), output::num(p[1]), output::num(p[2]), output::num(*val))?;
        }
        Ok(())
    })?;
    let mut files = vec![csv];
    if cfg.output.vtk_every > 0 {
        files.extend(emit_1d(dir, "chat", &net.graph, &line, None, &sol, cfg.output.vtk_every)?);
    }
    Ok(RunReport { files, summary: json!({ "line_vertices": line.num_vertices(), "steps": sol.times.len() - 1 }) })
}
