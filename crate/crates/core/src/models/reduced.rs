use serde::{Deserialize, Serialize};

use super::{axpy_into, LinePhysics, ModelError, Physics, SolverOptions, StepSolver, TimeGrid, TransientSolution};
use crate::coupling::{assemble_exchange_blocks, build_perimeter_average, default_circle_points};
use crate::fem::{assemble_1d, assemble_3d, check_nonnegative, load_1d, load_vector, Line1d, ScalarField, Term1d, Term3d};
use crate::geometry::{CenterlineGraph, VesselGeometry};
use crate::linalg::{BlockSystem, CsrMatrix};
use crate::mesh::{region, LineMesh, PointLocator, TetMesh};

/// Discretization of `∂ₜ(A ĉ)` in the reduced equations.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TimeDerivative {
    /// `(A(tⁿ⁺¹)ĉⁿ⁺¹ − A(tⁿ)ĉⁿ)/τ`; conserves `∫ A ĉ` exactly.
    #[default]
    Conservative,
    /// `A(tⁿ⁺¹)(ĉⁿ⁺¹ − ĉⁿ)/τ + ∂ₜA(tⁿ⁺¹) ĉⁿ⁺¹`.
    Split,
}

/// Coupled tissue / centerline problem.
#[derive(Debug, Clone)]
pub struct Coupled3d1d<'a> {
    /// Mesh of the whole domain, vessel included.
    pub mesh: &'a TetMesh,
    pub tissue: Physics,
    pub line: Line1d<'a>,
    pub vessel: LinePhysics,
    pub xi: ScalarField,
    pub dirichlet: Vec<u8>,
    pub time: TimeGrid,
    /// Circle points of the perimeter average; chosen from the mesh size when `None`.
    pub n_quad: Option<usize>,
    pub time_derivative: TimeDerivative,
    pub solver: SolverOptions,
}

/// Tissue coupled to a vessel and its perivascular annulus on one centerline.
#[derive(Debug, Clone)]
pub struct Coupled3d1d1d<'a> {
    pub mesh: &'a TetMesh,
    pub tissue: Physics,
    pub graph: &'a CenterlineGraph,
    pub line_mesh: &'a LineMesh,
    /// Cylinder of radius R1 (one entry per curve, or a single shared one).
    pub vessel_geometry: Vec<VesselGeometry>,
    /// Annulus R1..R2.
    pub pvs_geometry: Vec<VesselGeometry>,
    pub vessel: LinePhysics,
    pub pvs: LinePhysics,
    /// Vessel wall permeability (vessel ↔ perivascular space).
    pub xi_v: ScalarField,
    /// Outer sheath permeability (perivascular space ↔ tissue).
    pub xi_s: ScalarField,
    pub dirichlet: Vec<u8>,
    pub time: TimeGrid,
    pub n_quad: Option<usize>,
    pub time_derivative: TimeDerivative,
    pub solver: SolverOptions,
}

/// Stand-alone reduced problem on a centerline graph.
#[derive(Debug, Clone)]
pub struct NetworkProblem<'a> {
    pub line: Line1d<'a>,
    pub physics: LinePhysics,
    /// Exchange `ξ P (ĉ − c̄)` with a prescribed exterior value per 1D node.
    pub exterior: Option<(ScalarField, Vec<f64>)>,
    /// Prescribed values at 1D nodes.
    pub dirichlet: Vec<(usize, f64)>,
    pub time: TimeGrid,
    pub time_derivative: TimeDerivative,
    pub solver: SolverOptions,
}

/// A-weighted mass and the operator a_Λ at time `t`. With the split time
/// derivative the ∂ₜA mass is included in the operator.
fn line_operator(
    line: &Line1d<'_>,
    phys: &LinePhysics,
    td: TimeDerivative,
    t: f64,
) -> Result<(CsrMatrix, CsrMatrix), ModelError> {
    let mut terms = vec![
        Term1d::MassA,
        Term1d::Stiffness(&phys.diffusion),
        Term1d::GsDrift(&phys.diffusion),
        Term1d::Convection(&phys.velocity),
    ];
    if td == TimeDerivative::Split {
        terms.push(Term1d::MassDtA);
    }
    let mut m = assemble_1d(line, &terms, t)?;
    let mass = m.remove(0);
    let op = m.iter().skip(1).fold(m[0].clone(), |acc, x| acc.add(1.0, x, 1.0));
    Ok((mass, op))
}

fn exchange_mass(line: &Line1d<'_>, xi: &ScalarField, w_bar: bool, t: f64) -> Result<CsrMatrix, ModelError> {
    Ok(assemble_1d(line, &[Term1d::Exchange { xi, w_bar }], t)?.remove(0))
}

fn line_initial(line: &Line1d<'_>, phys: &LinePhysics) -> Result<Vec<f64>, ModelError> {
    line.mesh
        .vertices
        .iter()
        .map(|v| match phys.initial.constant_value() {
            Some(c) => Ok(c),
            None => Ok(line.section_mean(v.curve, v.s, 0.0, |x| phys.initial.eval(x, 0.0))?),
        })
        .collect()
}

fn dirichlet_mask(mesh: &TetMesh, markers: &[u8]) -> Vec<bool> {
    let mut m = vec![false; mesh.num_vertices()];
    for f in mesh.facets.iter().filter(|f| markers.contains(&f.marker)) {
        for &v in &f.vertices {
            m[v] = true;
        }
    }
    m
}

fn circle_points(mesh: &TetMesh, line: &Line1d<'_>, requested: Option<usize>) -> Result<usize, ModelError> {
    if let Some(n) = requested {
        return Ok(n);
    }
    let region = mesh.regions.contains(&region::VESSEL).then_some(region::VESSEL);
    let (h_min, _) = mesh.mesh_size(region);
    let mut r2 = 0.0f64;
    for v in &line.mesh.vertices {
        r2 = r2.max(line.geometry(v.curve).radii(v.s, 0.0)?.1);
    }
    Ok(default_circle_points(r2, h_min))
}

struct Tissue {
    mass: CsrMatrix,
    mask: Vec<bool>,
    initial: Vec<f64>,
}

impl Tissue {
    fn new(mesh: &TetMesh, phys: &Physics, dirichlet: &[u8]) -> Result<Tissue, ModelError> {
        let mass = assemble_3d(mesh, None, &[Term3d::Mass(&ScalarField::Constant(1.0))], 0.0)?.remove(0);
        let initial = mesh.vertices.iter().map(|&x| phys.initial.eval(x, 0.0)).collect();
        Ok(Tissue { mass, mask: dirichlet_mask(mesh, dirichlet), initial })
    }

    fn operator(&self, mesh: &TetMesh, phys: &Physics, tau: f64, t: f64) -> Result<CsrMatrix, ModelError> {
        let kc = assemble_3d(mesh, None, &[Term3d::Stiffness(&phys.diffusion), Term3d::Convection(&phys.velocity)], t)?;
        Ok(self.mass.add(1.0 / tau, &kc[0], 1.0).add(1.0, &kc[1], 1.0))
    }

    fn rhs(&self, mesh: &TetMesh, phys: &Physics, c: &[f64], tau: f64, t: f64) -> Vec<f64> {
        let mut b = load_vector(mesh, None, &phys.source, t);
        axpy_into(&mut b, 1.0 / tau, &self.mass.matvec(c));
        b
    }
}

fn split_state(x: &[f64], sizes: &[usize]) -> Vec<Vec<f64>> {
    let mut off = 0;
    sizes
        .iter()
        .map(|&n| {
            off += n;
            x[off - n..off].to_vec()
        })
        .collect()
}

/// Backward Euler solve of the coupled 3D-1D problem; fields `c` and `chat`.
pub fn solve_3d1d(p: &Coupled3d1d<'_>) -> Result<TransientSolution, ModelError> {
    let steps = p.time.steps()?;
    let tau = p.time.tau;
    check_nonnegative(&p.xi, &p.line.mesh.vertices.iter().map(|v| v.point).collect::<Vec<_>>(), 0.0)?;
    let n_quad = circle_points(p.mesh, &p.line, p.n_quad)?;
    let locator = PointLocator::new(p.mesh);
    let tissue = Tissue::new(p.mesh, &p.tissue, &p.dirichlet)?;
    let geometry_moves = p.line.geoms.iter().any(|g| g.is_time_dependent());
    let static_problem = !geometry_moves
        && !p.tissue.operator_is_time_dependent()
        && !p.vessel.operator_is_time_dependent()
        && !p.xi.is_time_dependent();
    let (n3, n1) = (p.mesh.num_vertices(), p.line.mesh.num_vertices());
    let mut mask = tissue.mask.clone();
    mask.extend(vec![false; n1]);

    let assemble = |t: f64| -> Result<(CsrMatrix, CsrMatrix), ModelError> {
        let pi = build_perimeter_average(p.mesh, &locator, &p.line, n_quad, t)?;
        let (m_a, a_line) = line_operator(&p.line, &p.vessel, p.time_derivative, t)?;
        let m_xp = exchange_mass(&p.line, &p.xi, false, t)?;
        let m_xpw = exchange_mass(&p.line, &p.xi, true, t)?;
        let b = assemble_exchange_blocks(&pi.matrix, &m_xp, &m_xpw);
        let mut sys = BlockSystem::new(vec![("c", n3), ("chat", n1)]);
        sys.set_block(0, 0, tissue.operator(p.mesh, &p.tissue, tau, t)?.add(1.0, &b.cc, 1.0))?;
        sys.set_block(0, 1, b.c_chat)?;
        sys.set_block(1, 0, b.chat_c)?;
        sys.set_block(1, 1, m_a.add(1.0 / tau, &a_line, 1.0).add(1.0, &b.chat_chat, 1.0))?;
        Ok((sys.matrix(), m_a))
    };

    let mut c = tissue.initial.clone();
    let mut chat = line_initial(&p.line, &p.vessel)?;
    let mut sol = TransientSolution::new(&["c", "chat"]);
    sol.push(0.0, vec![c.clone(), chat.clone()]);
    sol.iterations.push(0);

    let (a0, mut m_a_prev) = assemble(0.0)?;
    let mut solver = StepSolver::new(&a0, mask.clone(), p.solver)?;
    for n in 0..steps {
        let t = p.time.time(n + 1);
        let mut m_a_new = m_a_prev.clone();
        if !static_problem {
            let (a, m_a) = assemble(t)?;
            solver = StepSolver::new(&a, mask.clone(), p.solver)?;
            m_a_new = m_a;
        }
        let m_hist = match p.time_derivative {
            TimeDerivative::Conservative => &m_a_prev,
            TimeDerivative::Split => &m_a_new,
        };
        let mut rhs = tissue.rhs(p.mesh, &p.tissue, &c, tau, t);
        let mut r1 = load_1d(&p.line, &p.vessel.source, t)?;
        axpy_into(&mut r1, 1.0 / tau, &m_hist.matvec(&chat));
        rhs.extend(r1);
        let x0 = [c.as_slice(), chat.as_slice()].concat();
        let (x, its) = solver.solve(rhs, &x0)?;
        let mut parts = split_state(&x, &[n3, n1]);
        chat = parts.pop().unwrap();
        c = parts.pop().unwrap();
        sol.push(t, vec![c.clone(), chat.clone()]);
        sol.iterations.push(its);
        m_a_prev = m_a_new;
    }
    Ok(sol)
}

/// Backward Euler solve of the tissue / perivascular / vessel problem;
/// fields `c`, `chat_p` and `chat_v`.
pub fn solve_3d1d1d(p: &Coupled3d1d1d<'_>) -> Result<TransientSolution, ModelError> {
    let steps = p.time.steps()?;
    let tau = p.time.tau;
    let line_v = Line1d { graph: p.graph, mesh: p.line_mesh, geoms: &p.vessel_geometry };
    let line_p = Line1d { graph: p.graph, mesh: p.line_mesh, geoms: &p.pvs_geometry };
    let nodes: Vec<_> = p.line_mesh.vertices.iter().map(|v| v.point).collect();
    check_nonnegative(&p.xi_v, &nodes, 0.0)?;
    check_nonnegative(&p.xi_s, &nodes, 0.0)?;
    for v in &p.line_mesh.vertices {
        let (r1, _) = line_p.geometry(v.curve).radii(v.s, 0.0)?;
        let rv = line_v.geometry(v.curve).radii(v.s, 0.0)?.1;
        if (r1 - rv).abs() > 1e-12 * rv.max(1.0) {
            return Err(ModelError::Invalid(format!("vessel radius {rv} differs from inner sheath radius {r1}")));
        }
    }
    let n_quad = circle_points(p.mesh, &line_p, p.n_quad)?;
    let locator = PointLocator::new(p.mesh);
    let tissue = Tissue::new(p.mesh, &p.tissue, &p.dirichlet)?;
    let geometry_moves = p.vessel_geometry.iter().chain(&p.pvs_geometry).any(|g| g.is_time_dependent());
    let static_problem = !geometry_moves
        && !p.tissue.operator_is_time_dependent()
        && !p.vessel.operator_is_time_dependent()
        && !p.pvs.operator_is_time_dependent()
        && !p.xi_v.is_time_dependent()
        && !p.xi_s.is_time_dependent();
    let (n3, n1) = (p.mesh.num_vertices(), p.line_mesh.num_vertices());
    let mut mask = tissue.mask.clone();
    mask.extend(vec![false; 2 * n1]);

    let assemble = |t: f64| -> Result<(CsrMatrix, CsrMatrix, CsrMatrix), ModelError> {
        let pi = build_perimeter_average(p.mesh, &locator, &line_p, n_quad, t)?;
        let (m_ap, a_p) = line_operator(&line_p, &p.pvs, p.time_derivative, t)?;
        let (m_av, a_v) = line_operator(&line_v, &p.vessel, p.time_derivative, t)?;
        let m_s = exchange_mass(&line_p, &p.xi_s, false, t)?;
        let m_v = exchange_mass(&line_v, &p.xi_v, false, t)?;
        let b = assemble_exchange_blocks(&pi.matrix, &m_s, &m_s);
        let mut sys = BlockSystem::new(vec![("c", n3), ("chat_p", n1), ("chat_v", n1)]);
        sys.set_block(0, 0, tissue.operator(p.mesh, &p.tissue, tau, t)?.add(1.0, &b.cc, 1.0))?;
        sys.set_block(0, 1, b.c_chat)?;
        sys.set_block(1, 0, b.chat_c)?;
        sys.set_block(1, 1, m_ap.add(1.0 / tau, &a_p, 1.0).add(1.0, &m_s, 1.0).add(1.0, &m_v, 1.0))?;
        sys.set_block(1, 2, m_v.scale(-1.0))?;
        sys.set_block(2, 1, m_v.scale(-1.0))?;
        sys.set_block(2, 2, m_av.add(1.0 / tau, &a_v, 1.0).add(1.0, &m_v, 1.0))?;
        Ok((sys.matrix(), m_ap, m_av))
    };

    let mut c = tissue.initial.clone();
    let mut chat_p = line_initial(&line_p, &p.pvs)?;
    let mut chat_v = line_initial(&line_v, &p.vessel)?;
    let mut sol = TransientSolution::new(&["c", "chat_p", "chat_v"]);
    sol.push(0.0, vec![c.clone(), chat_p.clone(), chat_v.clone()]);
    sol.iterations.push(0);

    let (a0, mut m_ap_prev, mut m_av_prev) = assemble(0.0)?;
    let mut solver = StepSolver::new(&a0, mask.clone(), p.solver)?;
    for n in 0..steps {
        let t = p.time.time(n + 1);
        let (mut m_ap_new, mut m_av_new) = (m_ap_prev.clone(), m_av_prev.clone());
        if !static_problem {
            let (a, m_ap, m_av) = assemble(t)?;
            solver = StepSolver::new(&a, mask.clone(), p.solver)?;
            m_ap_new = m_ap;
            m_av_new = m_av;
        }
        let (hp, hv) = match p.time_derivative {
            TimeDerivative::Conservative => (&m_ap_prev, &m_av_prev),
            TimeDerivative::Split => (&m_ap_new, &m_av_new),
        };
        let mut rhs = tissue.rhs(p.mesh, &p.tissue, &c, tau, t);
        let mut rp = load_1d(&line_p, &p.pvs.source, t)?;
        axpy_into(&mut rp, 1.0 / tau, &hp.matvec(&chat_p));
        let mut rv = load_1d(&line_v, &p.vessel.source, t)?;
        axpy_into(&mut rv, 1.0 / tau, &hv.matvec(&chat_v));
        rhs.extend(rp);
        rhs.extend(rv);
        let x0 = [c.as_slice(), chat_p.as_slice(), chat_v.as_slice()].concat();
        let (x, its) = solver.solve(rhs, &x0)?;
        let mut parts = split_state(&x, &[n3, n1, n1]);
        chat_v = parts.pop().unwrap();
        chat_p = parts.pop().unwrap();
        c = parts.pop().unwrap();
        sol.push(t, vec![c.clone(), chat_p.clone(), chat_v.clone()]);
        sol.iterations.push(its);
        m_ap_prev = m_ap_new;
        m_av_prev = m_av_new;
    }
    Ok(sol)
}

fn network_operator(p: &NetworkProblem<'_>, t: f64) -> Result<(CsrMatrix, CsrMatrix, Vec<f64>), ModelError> {
    let (m_a, mut op) = line_operator(&p.line, &p.physics, p.time_derivative, t)?;
    let mut load = load_1d(&p.line, &p.physics.source, t)?;
    if let Some((xi, cbar)) = &p.exterior {
        let m_xp = exchange_mass(&p.line, xi, false, t)?;
        let m_xpw = exchange_mass(&p.line, xi, true, t)?;
        op = op.add(1.0, &m_xpw, 1.0);
        axpy_into(&mut load, 1.0, &m_xp.matvec(cbar));
    }
    Ok((m_a, op, load))
}

fn network_constraints(p: &NetworkProblem<'_>) -> Result<(Vec<bool>, Vec<f64>), ModelError> {
    let n = p.line.mesh.num_vertices();
    let (mut mask, mut values) = (vec![false; n], vec![0.0; n]);
    for &(i, v) in &p.dirichlet {
        if i >= n {
            return Err(ModelError::Invalid(format!("constrained node {i} out of range")));
        }
        mask[i] = true;
        values[i] = v;
    }
    Ok((mask, values))
}

/// Transient reduced problem on a graph; single field `chat`. Junction nodes
/// are shared by the incident curves, so the concentration is continuous
/// there and the fluxes balance weakly.
pub fn solve_1d_network(p: &NetworkProblem<'_>) -> Result<TransientSolution, ModelError> {
    let steps = p.time.steps()?;
    let tau = p.time.tau;
    let n = p.line.mesh.num_vertices();
    if let Some((xi, cbar)) = &p.exterior {
        if cbar.len() != n {
            return Err(ModelError::Invalid("exterior concentration has wrong length".into()));
        }
        check_nonnegative(xi, &p.line.mesh.vertices.iter().map(|v| v.point).collect::<Vec<_>>(), 0.0)?;
    }
    let (mask, values) = network_constraints(p)?;
    let static_problem = !p.line.geoms.iter().any(|g| g.is_time_dependent()) && !p.physics.operator_is_time_dependent();
    let build = |t: f64| -> Result<(StepSolver, CsrMatrix), ModelError> {
        let (m_a, op, _) = network_operator(p, t)?;
        let s = StepSolver::with_values(&m_a.add(1.0 / tau, &op, 1.0), mask.clone(), values.clone(), p.solver)?;
        Ok((s, m_a))
    };
    let mut chat = line_initial(&p.line, &p.physics)?;
    let mut sol = TransientSolution::new(&["chat"]);
    sol.push(0.0, vec![chat.clone()]);
    sol.iterations.push(0);
    let (mut solver, mut m_prev) = build(0.0)?;
    for k in 0..steps {
        let t = p.time.time(k + 1);
        let mut m_new = m_prev.clone();
        if !static_problem {
            let (s, m) = build(t)?;
            solver = s;
            m_new = m;
        }
        let (_, _, mut rhs) = network_operator(p, t)?;
        let hist = match p.time_derivative {
            TimeDerivative::Conservative => &m_prev,
            TimeDerivative::Split => &m_new,
        };
        axpy_into(&mut rhs, 1.0 / tau, &hist.matvec(&chat));
        let (x, its) = solver.solve(rhs, &chat)?;
        chat = x;
        sol.push(t, vec![chat.clone()]);
        sol.iterations.push(its);
        m_prev = m_new;
    }
    Ok(sol)
}

/// Steady state of the reduced network problem at the coefficients of time `t`.
pub fn solve_1d_steady(p: &NetworkProblem<'_>, t: f64) -> Result<Vec<f64>, ModelError> {
    let (mask, values) = network_constraints(p)?;
    let (_, mut op, load) = network_operator(p, t)?;
    if p.time_derivative == TimeDerivative::Conservative {
        let dta = assemble_1d(&p.line, &[Term1d::MassDtA], t)?.remove(0);
        op = op.add(1.0, &dta, 1.0);
    }
    let solver = StepSolver::with_values(&op, mask, values, p.solver)?;
    Ok(solver.solve(load, &vec![0.0; op.nrows()])?.0)
}
