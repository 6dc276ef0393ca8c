use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::equilibrium::{stiffness_factors, Boundary, EquilibriumSolver};
use super::material::{elastic_stress, isotropic, scaled};
use super::{CurveSample, EventKind, EventLog, LatticeField, Law, LoadProgram, Models, Rewire, SolverError};
use crate::constitutive::{
    creep_rate, effective_stress, plastic_flow_increment, yield_function, yield_gradients, OntologyConstants,
    StrainState, StressState, YieldModel,
};
use crate::lattice::{Bond, FsnLattice};

const JITTER_STREAM: u64 = 0x6a09_e667_f3bc_c908;

#[derive(Debug, Clone, PartialEq)]
pub enum RunStatus {
    Completed,
    /// Equilibrium failed at `step`; samples and events stop before it.
    Halted { step: usize, error: String },
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub samples: Vec<CurveSample>,
    pub log: EventLog,
    pub status: RunStatus,
    /// Lattice after fractures and rewiring.
    pub lattice: FsnLattice,
    /// Step at which each node first reached the yield surface.
    pub first_yield: Vec<Option<usize>>,
}

impl RunOutcome {
    pub fn completed(&self) -> bool {
        self.status == RunStatus::Completed
    }
}

struct NodeState {
    plastic: StrainState,
    hardening: YieldModel,
    s_prev: f64,
    yielded: bool,
}

fn jitter(lattice: &mut FsnLattice, amount: f64, seed: u64) {
    if amount == 0.0 {
        return;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ JITTER_STREAM);
    for b in &mut lattice.bonds {
        b.stiffness *= 1.0 + amount * rng.random_range(-1.0..1.0);
    }
}

/// Drop of `S_eff` per unit plastic multiplier along the yield gradients.
fn relaxation_slope(st: &StressState, c: &OntologyConstants, factor: f64) -> f64 {
    let g = yield_gradients(st, c);
    let phonon = if g.phonon_degenerate { 0.0 } else { 3.0 * c.shear_modulus() };
    let phason = if g.phason_degenerate || c.phason_coupling == 0.0 {
        0.0
    } else {
        let unit = g.phason.scale(1.0 / c.phason_coupling);
        let image = isotropic(unit.matrix(), c);
        c.phason_coupling * c.phason_coupling * image.dot(unit.matrix())
    };
    factor * (phonon + phason)
}

/// Plastic multiplier for one step: the flow-rule part plus implicit creep on
/// the relaxed state, never relaxing below the yield surface.
fn plastic_multiplier(
    s_trial: f64,
    flow_part: f64,
    slope: f64,
    dt: f64,
    y: f64,
    models: &Models,
) -> Result<f64, SolverError> {
    if slope <= 0.0 {
        return Ok(0.0);
    }
    let cap = ((s_trial - y) / slope).max(0.0);
    let Some(creep) = &models.creep else {
        return Ok(flow_part.min(cap));
    };
    if dt == 0.0 || cap == 0.0 {
        return Ok(flow_part.min(cap));
    }
    let g = |x: f64| -> Result<f64, SolverError> {
        Ok(x - flow_part - dt * creep_rate(s_trial - slope * x, creep)?)
    };
    if g(cap)? <= 0.0 {
        return Ok(cap);
    }
    let (mut lo, mut hi) = (0.0, cap);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid)? <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn distance(l: &FsnLattice, a: usize, b: usize) -> f64 {
    let (x, y) = (l.nodes[a].coords, l.nodes[b].coords);
    ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2) + (x[2] - y[2]).powi(2)).sqrt()
}

/// Closest pair of distinct, unbonded nodes with at least one intact bond,
/// drawn from the broken bond's endpoints and their intact neighbors.
fn rewire_candidate(l: &FsnLattice, broken: &Bond) -> Option<(usize, usize, f64)> {
    let adj = l.adjacency();
    let mut site: Vec<usize> = vec![broken.a, broken.b];
    for &e in &[broken.a, broken.b] {
        site.extend(adj[e].iter().map(|&(n, _)| n));
    }
    site.sort_unstable();
    site.dedup();
    site.retain(|&n| !adj[n].is_empty() || n == broken.a || n == broken.b);
    let mut best: Option<(usize, usize, f64)> = None;
    for (i, &a) in site.iter().enumerate() {
        for &b in &site[i + 1..] {
            if l.bonds.iter().any(|bd| bd.joins(a, b)) {
                continue;
            }
            let d = distance(l, a, b);
            if best.is_none_or(|(_, _, bd)| d < bd) {
                best = Some((a, b, d));
            }
        }
    }
    best
}

fn sample(step: usize, applied: f64, s_eff: &[f64], active: &[bool], states: &[NodeState], broken: usize, new: usize) -> CurveSample {
    let count = active.iter().filter(|a| **a).count();
    let (mean, frac) = if count == 0 {
        (0.0, 0.0)
    } else {
        let sum: f64 = s_eff.iter().zip(active).filter(|(_, a)| **a).map(|(s, _)| *s).sum();
        let y = states.iter().zip(active).filter(|(s, a)| **a && s.yielded).count();
        (sum / count as f64, y as f64 / count as f64)
    };
    CurveSample {
        step,
        applied_strain: applied,
        mean_effective_stress: mean,
        broken_bonds: broken,
        new_bonds: new,
        plastic_fraction: frac,
    }
}

fn active_nodes(l: &FsnLattice) -> Vec<bool> {
    let mut a = vec![l.len() == 1; l.len()];
    for b in l.bonds.iter().filter(|b| b.intact) {
        a[b.a] = true;
        a[b.b] = true;
    }
    a
}

/// Strain-controlled loading with yield, creep, fracture and rewiring.
///
/// Step 0 is the unloaded origin. Each later step raises the boundary map by
/// `strain_rate · dt` and solves equilibrium of the network. Plastic strain is
/// a node-local internal variable: node stress is the stiffness-scaled elastic
/// map of total minus plastic strain, and it does not feed back into the
/// displacement solve. At most one bond breaks per step.
pub fn run_loading(lattice: &FsnLattice, program: &LoadProgram, models: &Models) -> Result<RunOutcome, SolverError> {
    program.validate()?;
    models.validate()?;
    let mut lat = lattice.clone();
    jitter(&mut lat, program.stiffness_jitter, program.seed);
    let n = lat.len();
    let c = models.constants;
    let mut states: Vec<NodeState> = (0..n)
        .map(|_| NodeState {
            plastic: StrainState::zero(),
            hardening: models.yield_model,
            s_prev: 0.0,
            yielded: false,
        })
        .collect();
    let mut log = EventLog::default();
    let mut first_yield = vec![None; n];
    let mut broken = 0;
    let mut new = 0;
    let mut budget = program.rewire_budget;
    let mut samples = vec![sample(0, 0.0, &vec![0.0; n], &active_nodes(&lat), &states, 0, 0)];
    let finish = |samples, log, status, lattice, first_yield| RunOutcome { samples, log, status, lattice, first_yield };
    if program.target_strain == 0.0 {
        return Ok(finish(samples, log, RunStatus::Completed, lat, first_yield));
    }
    let dt = program.dt();
    let mut solver = EquilibriumSolver::new(&lat, models);
    let mut factor = stiffness_factors(&lat);
    let mut field = LatticeField::zeros(n);
    for step in 1..=program.steps {
        let applied = program.target_strain * step as f64 / program.steps as f64;
        let boundary = Boundary::scaled(&program.phonon_direction, &program.phason_direction, applied);
        let report = match solver.solve(&boundary, Some(&field), None) {
            Ok(r) => r,
            Err(e) => {
                return Ok(finish(samples, log, RunStatus::Halted { step, error: e.to_string() }, lat, first_yield));
            }
        };
        field = report.field;
        let strains = solver.strains(&field);
        let active = active_nodes(&lat);
        let mut s_eff = vec![0.0; n];
        for i in 0..n {
            if !active[i] || solver.operator().is_degenerate(i) {
                continue;
            }
            let trial = match models.law {
                Law::Elastic => scaled(elastic_stress(&strains[i].sub(&states[i].plastic), &c), factor[i]),
                Law::TotalDeformation => report.stresses[i],
            };
            let eff = effective_stress(&trial, &c).s_eff;
            let st = &mut states[i];
            let y = st.hardening.yield_stress();
            if yield_function(eff, &st.hardening) < 0.0 {
                st.yielded = false;
                st.s_prev = eff;
                s_eff[i] = eff;
                continue;
            }
            if !st.yielded {
                log.push(step, EventKind::Yield, i, eff);
                first_yield[i].get_or_insert(step);
                st.yielded = true;
            }
            if models.law == Law::TotalDeformation {
                st.s_prev = eff;
                s_eff[i] = eff;
                continue;
            }
            let (flow, _) = plastic_flow_increment(&trial, eff - st.s_prev, &models.flow, &st.hardening, &c)?;
            let g = yield_gradients(&trial, &c);
            let flow_part = if g.phonon_degenerate {
                0.0
            } else {
                // the flow increment is the multiplier times the unit-norm gradient
                (flow.ddot(&flow) / g.phonon.ddot(&g.phonon)).sqrt()
            };
            let slope = relaxation_slope(&trial, &c, factor[i]);
            let dl = plastic_multiplier(eff, flow_part, slope, dt, y, models)?;
            if dl > 0.0 {
                st.plastic.phonon = st.plastic.phonon.add(&g.phonon.scale(dl));
                st.plastic.phason = st.plastic.phason.add(&g.phason.scale(dl));
                st.hardening.advance(dl);
            }
            let relaxed = (eff - slope * dl).max(y.min(eff));
            st.s_prev = relaxed;
            s_eff[i] = relaxed;
        }

        let mut worst: Option<(usize, f64)> = None;
        for (id, b) in lat.bonds.iter().enumerate().filter(|(_, b)| b.intact) {
            let m = 0.5 * (s_eff[b.a] + s_eff[b.b]);
            if m > program.fracture_threshold && worst.is_none_or(|(_, w)| m > w) {
                worst = Some((id, m));
            }
        }
        if let Some((id, m)) = worst {
            lat.bonds[id].intact = false;
            broken += 1;
            log.push(step, EventKind::Fracture, id, m);
            if program.rewire == Rewire::NearestUnbonded && budget > 0 {
                let cut = lat.bonds[id].clone();
                if let Some((a, b, d)) = rewire_candidate(&lat, &cut) {
                    lat.bonds.push(Bond { a, b, stiffness: cut.stiffness, intact: true });
                    new += 1;
                    budget -= 1;
                    log.push(step, EventKind::Rewire, lat.bonds.len() - 1, d);
                }
            }
            solver = EquilibriumSolver::new(&lat, models);
            factor = stiffness_factors(&lat);
        }
        samples.push(sample(step, applied, &s_eff, &active_nodes(&lat), &states, broken, new));
    }
    Ok(finish(samples, log, RunStatus::Completed, lat, first_yield))
}
