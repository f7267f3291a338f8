use super::{axpy_into, ModelError, Physics, SolverOptions, StepSolver, TimeGrid, TransientSolution};
use crate::fem::{assemble_3d, check_nonnegative, facet_mass_on, load_vector, ScalarField, Term3d};
use crate::linalg::{BlockSystem, CsrMatrix, TripletBuilder};
use crate::mesh::{facet, Facet, TetMesh};

/// One subdomain of the reference problem.
#[derive(Debug, Clone)]
pub struct ReferenceRegion {
    pub region: u8,
    pub name: String,
    pub physics: Physics,
}

/// Exchange `∫ ξ (c_a − c_b)(φ_a − φ_b)` across the facets shared by two regions.
#[derive(Debug, Clone)]
pub struct Interface {
    pub regions: (u8, u8),
    pub xi: ScalarField,
}

#[derive(Debug, Clone)]
pub struct ReferenceProblem<'a> {
    pub mesh: &'a TetMesh,
    pub regions: Vec<ReferenceRegion>,
    pub interfaces: Vec<Interface>,
    /// Facet markers carrying c = 0; boundaries not listed are no-flux.
    pub dirichlet: Vec<u8>,
    pub time: TimeGrid,
    pub solver: SolverOptions,
}

#[derive(Debug, Clone)]
pub struct ReferenceSolution {
    /// One submesh per region, in problem order.
    pub submeshes: Vec<TetMesh>,
    pub solution: TransientSolution,
}

impl ReferenceSolution {
    pub fn submesh(&self, name: &str) -> Result<&TetMesh, ModelError> {
        Ok(&self.submeshes[self.solution.field_index(name)?])
    }
}

struct InterfaceData {
    a: usize,
    b: usize,
    facets: Vec<Facet>,
}

fn interface_marker(a: u8, b: u8) -> u8 {
    use crate::mesh::region::{PVS, VESSEL};
    if (a == VESSEL && b == PVS) || (a == PVS && b == VESSEL) {
        facet::GAMMA_V
    } else {
        facet::GAMMA_S
    }
}

fn interfaces(p: &ReferenceProblem<'_>) -> Result<Vec<InterfaceData>, ModelError> {
    let faces = p.mesh.face_map();
    let mut out = Vec::new();
    for itf in &p.interfaces {
        let find = |r: u8| {
            p.regions
                .iter()
                .position(|x| x.region == r)
                .ok_or_else(|| ModelError::Invalid(format!("interface refers to missing region {r}")))
        };
        let (a, b) = (find(itf.regions.0)?, find(itf.regions.1)?);
        let pair = |cells: &[usize]| {
            cells.len() == 2 && {
                let (r0, r1) = (p.mesh.regions[cells[0]], p.mesh.regions[cells[1]]);
                (r0, r1) == itf.regions || (r1, r0) == itf.regions
            }
        };
        let mut facets: Vec<Facet> = faces
            .values()
            .filter(|(_, cells)| pair(cells))
            .map(|(f, _)| Facet { vertices: *f, marker: interface_marker(itf.regions.0, itf.regions.1) })
            .collect();
        facets.sort_by_key(|f| {
            let mut v = f.vertices;
            v.sort_unstable();
            v
        });
        // marked interface facets must be shared by exactly one cell of each side
        let marker = interface_marker(itf.regions.0, itf.regions.1);
        let touches = |cells: &[usize]| cells.iter().any(|&c| {
            let r = p.mesh.regions[c];
            r == itf.regions.0 || r == itf.regions.1
        });
        let unmatched: Vec<[usize; 3]> = p
            .mesh
            .facets_with(marker)
            .filter_map(|f| {
                let mut key = f.vertices;
                key.sort_unstable();
                match faces.get(&key) {
                    Some((_, cells)) if pair(cells) || !touches(cells) => None,
                    _ => Some(f.vertices),
                }
            })
            .collect();
        if !unmatched.is_empty() {
            return Err(ModelError::NonConforming(unmatched));
        }
        if facets.is_empty() {
            return Err(ModelError::Invalid(format!("regions {:?} share no facets", itf.regions)));
        }
        out.push(InterfaceData { a, b, facets });
    }
    Ok(out)
}

fn local_maps(parent: &TetMesh, subs: &[TetMesh]) -> Vec<Vec<usize>> {
    subs.iter()
        .map(|s| {
            let mut m = vec![usize::MAX; parent.num_vertices()];
            for (l, &g) in s.vertex_parent.as_ref().expect("submesh").iter().enumerate() {
                m[g] = l;
            }
            m
        })
        .collect()
}

/// Backward Euler solve of the multi-region problem with interface exchange.
pub fn solve_reference_multidomain(p: &ReferenceProblem<'_>) -> Result<ReferenceSolution, ModelError> {
    let steps = p.time.steps()?;
    if p.regions.is_empty() {
        return Err(ModelError::Invalid("no regions".into()));
    }
    for itf in &p.interfaces {
        check_nonnegative(&itf.xi, &p.mesh.vertices, 0.0)?;
    }
    let subs: Vec<TetMesh> = p
        .regions
        .iter()
        .map(|r| p.mesh.extract_submesh(&[r.region]))
        .collect::<Result<_, _>>()?;
    let maps = local_maps(p.mesh, &subs);
    let itfs = interfaces(p)?;
    let names: Vec<&str> = p.regions.iter().map(|r| r.name.as_str()).collect();
    let sizes: Vec<usize> = subs.iter().map(|s| s.num_vertices()).collect();
    let tau = p.time.tau;

    let mut mask = Vec::new();
    for s in &subs {
        let mut m = vec![false; s.num_vertices()];
        for f in s.facets.iter().filter(|f| p.dirichlet.contains(&f.marker)) {
            for &v in &f.vertices {
                m[v] = true;
            }
        }
        mask.extend(m);
    }

    let unit = ScalarField::Constant(1.0);
    let masses: Vec<CsrMatrix> = subs
        .iter()
        .map(|s| assemble_3d(s, None, &[Term3d::Mass(&unit)], 0.0).map(|mut v| v.remove(0)))
        .collect::<Result<_, _>>()?;

    let assemble = |t: f64| -> Result<CsrMatrix, ModelError> {
        let mut sys = BlockSystem::new(names.iter().zip(&sizes).map(|(n, &s)| (*n, s)).collect());
        for (i, (r, s)) in p.regions.iter().zip(&subs).enumerate() {
            let kc = assemble_3d(
                s,
                None,
                &[Term3d::Stiffness(&r.physics.diffusion), Term3d::Convection(&r.physics.velocity)],
                t,
            )?;
            sys.set_block(i, i, masses[i].add(1.0 / tau, &kc[0], 1.0).add(1.0, &kc[1], 1.0))?;
        }
        for (itf, data) in p.interfaces.iter().zip(&itfs) {
            let f = facet_mass_on(p.mesh, &data.facets, &itf.xi, t);
            let (ma, mb) = (&maps[data.a], &maps[data.b]);
            let (na, nb) = (sizes[data.a], sizes[data.b]);
            let mut blocks = [
                TripletBuilder::new(na, na),
                TripletBuilder::new(nb, nb),
                TripletBuilder::new(na, nb),
                TripletBuilder::new(nb, na),
            ];
            for (i, j, v) in f.iter() {
                blocks[0].push(ma[i], ma[j], v);
                blocks[1].push(mb[i], mb[j], v);
                blocks[2].push(ma[i], mb[j], -v);
                blocks[3].push(mb[i], ma[j], -v);
            }
            let [aa, bb, ab, ba] = blocks.map(|b| b.build());
            sys.add_block(data.a, data.a, 1.0, &aa)?;
            sys.add_block(data.b, data.b, 1.0, &bb)?;
            sys.add_block(data.a, data.b, 1.0, &ab)?;
            sys.add_block(data.b, data.a, 1.0, &ba)?;
        }
        Ok(sys.matrix())
    };

    let static_problem =
        !p.regions.iter().any(|r| r.physics.operator_is_time_dependent()) && !p.interfaces.iter().any(|i| i.xi.is_time_dependent());

    let mut state: Vec<Vec<f64>> = p
        .regions
        .iter()
        .zip(&subs)
        .map(|(r, s)| s.vertices.iter().map(|&x| r.physics.initial.eval(x, 0.0)).collect())
        .collect();
    let mut sol = TransientSolution::new(&names);
    sol.push(0.0, state.clone());
    sol.iterations.push(0);

    let mut solver = if static_problem { Some(StepSolver::new(&assemble(0.0)?, mask.clone(), p.solver)?) } else { None };
    for n in 0..steps {
        let t = p.time.time(n + 1);
        if !static_problem {
            solver = Some(StepSolver::new(&assemble(t)?, mask.clone(), p.solver)?);
        }
        let mut rhs = Vec::with_capacity(mask.len());
        for (i, (r, s)) in p.regions.iter().zip(&subs).enumerate() {
            let mut b = load_vector(s, None, &r.physics.source, t);
            axpy_into(&mut b, 1.0 / tau, &masses[i].matvec(&state[i]));
            rhs.extend(b);
        }
        let x0: Vec<f64> = state.concat();
        let (x, its) = solver.as_ref().expect("solver").solve(rhs, &x0)?;
        let mut off = 0;
        for (i, &n) in sizes.iter().enumerate() {
            state[i] = x[off..off + n].to_vec();
            off += n;
        }
        sol.push(t, state.clone());
        sol.iterations.push(its);
    }
    Ok(ReferenceSolution { submeshes: subs, solution: sol })
}
