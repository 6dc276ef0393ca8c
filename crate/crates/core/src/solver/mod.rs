//! Quasi-static mechanics on an FSN lattice.
//!
//! Gradients and divergences are recovered per node by weighted least squares
//! over intact-bond neighbors in node coordinates ([`GradientOperator`]). The
//! outermost shell carries prescribed affine displacements; interior
//! displacements are relaxed until the discrete divergence of both stress
//! channels vanishes ([`solve_equilibrium`]). [`run_loading`] drives a
//! strain-controlled program with yield, creep, fracture and rewiring.

mod equilibrium;
mod loading;
mod material;
mod onset;
mod output;
mod stencil;

pub use equilibrium::{solve_equilibrium, Boundary, EquilibriumSolver, SolveOptions, SolveReport};
pub use loading::{run_loading, RunOutcome, RunStatus};
pub use material::{elastic_stress, node_stress, Law};
pub use onset::{ductility_onset, homologous_exposition, linear_fit, LinearFit};
pub use output::{curve_csv, events_jsonl, parse_curve_csv, CURVE_HEADER};

pub use stencil::{compute_strains, equilibrium_residual, interior_residual_norm, GradientOperator, StrainField};

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constitutive::{ConstitutiveError, CreepParams, FlowModel, OntologyConstants, YieldModel};

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("field has {got} entries, lattice has {expected} nodes")]
    SizeMismatch { expected: usize, got: usize },
    #[error("equilibrium did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        best: Box<LatticeField>,
    },
    #[error("invalid load program: {0}")]
    InvalidProgram(String),
    #[error("too few curve samples: {got} (need at least {need})")]
    TooFewSamples { got: usize, need: usize },
    #[error(transparent)]
    Constitutive(#[from] ConstitutiveError),
}

/// Per-node phonon displacement `u` and phason displacement `w`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeField {
    pub u: Vec<Vector3<f64>>,
    pub w: Vec<Vector3<f64>>,
}

impl LatticeField {
    pub fn zeros(n: usize) -> Self {
        Self {
            u: vec![Vector3::zeros(); n],
            w: vec![Vector3::zeros(); n],
        }
    }

    /// `u = G_u x`, `w = G_w x` at every node position.
    pub fn affine(coords: &[[f64; 3]], gu: &Matrix3<f64>, gw: &Matrix3<f64>) -> Self {
        Self {
            u: coords.iter().map(|x| gu * Vector3::from(*x)).collect(),
            w: coords.iter().map(|x| gw * Vector3::from(*x)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LoadMode {
    #[default]
    StrainControlled,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rewire {
    #[default]
    Off,
    NearestUnbonded,
}

/// Strain-controlled loading schedule. Time is measured in units of time
/// exposition, so `strain_rate` is strain per unit of E.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadProgram {
    #[serde(default)]
    pub mode: LoadMode,
    pub strain_rate: f64,
    pub target_strain: f64,
    pub steps: usize,
    /// Bonds whose mean endpoint effective stress exceeds this break.
    pub fracture_threshold: f64,
    #[serde(default)]
    pub rewire: Rewire,
    #[serde(default)]
    pub rewire_budget: usize,
    #[serde(default)]
    pub seed: u64,
    /// Phonon displacement gradient per unit applied strain (row-major).
    #[serde(default = "uniaxial")]
    pub phonon_direction: [f64; 9],
    /// Phason displacement gradient per unit applied strain (row-major).
    #[serde(default)]
    pub phason_direction: [f64; 9],
    /// Relative half-width of the seeded uniform perturbation of bond stiffness.
    #[serde(default)]
    pub stiffness_jitter: f64,
}

fn uniaxial() -> [f64; 9] {
    [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]
}

impl LoadProgram {
    pub fn new(strain_rate: f64, target_strain: f64, steps: usize, fracture_threshold: f64) -> Self {
        Self {
            mode: LoadMode::StrainControlled,
            strain_rate,
            target_strain,
            steps,
            fracture_threshold,
            rewire: Rewire::Off,
            rewire_budget: 0,
            seed: 0,
            phonon_direction: uniaxial(),
            phason_direction: [0.0; 9],
            stiffness_jitter: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        let fail = |m: &str| Err(SolverError::InvalidProgram(m.to_string()));
        if !(self.strain_rate > 0.0 && self.strain_rate.is_finite()) {
            return fail("strain_rate must be > 0");
        }
        if !(self.target_strain >= 0.0 && self.target_strain.is_finite()) {
            return fail("target_strain must be >= 0");
        }
        if self.steps == 0 {
            return fail("steps must be > 0");
        }
        if !(self.fracture_threshold > 0.0) {
            return fail("fracture_threshold must be > 0");
        }
        if !(0.0..1.0).contains(&self.stiffness_jitter) {
            return fail("stiffness_jitter must be in [0, 1)");
        }
        if self.phonon_direction.iter().chain(&self.phason_direction).any(|v| !v.is_finite()) {
            return fail("load directions must be finite");
        }
        Ok(())
    }

    /// Time-exposition increment per step.
    pub fn dt(&self) -> f64 {
        self.target_strain / (self.strain_rate * self.steps as f64)
    }
}

/// Everything constitutive a run needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Models {
    pub constants: OntologyConstants,
    pub yield_model: YieldModel,
    pub flow: FlowModel,
    /// Rate-dependent relaxation above the yield surface; `None` disables it.
    pub creep: Option<CreepParams>,
    pub law: Law,
    pub solver: SolveOptions,
}

impl Models {
    pub fn validate(&self) -> Result<(), SolverError> {
        self.constants.validate()?;
        self.yield_model.validate()?;
        self.flow.validate()?;
        if let Some(c) = &self.creep {
            c.validate()?;
        }
        self.solver.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Yield,
    Fracture,
    Rewire,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub step: usize,
    pub kind: EventKind,
    /// Node id for yield events, bond id otherwise.
    pub id: usize,
    pub detail: f64,
}

/// Events in the order they happened; steps never decrease.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EventLog {
    pub events: Vec<Event>,
}

impl EventLog {
    pub fn push(&mut self, step: usize, kind: EventKind, id: usize, detail: f64) {
        debug_assert!(self.events.last().is_none_or(|e| e.step <= step));
        self.events.push(Event { step, kind, id, detail });
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn count(&self, kind: EventKind) -> usize {
        self.events.iter().filter(|e| e.kind == kind).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveSample {
    pub step: usize,
    pub applied_strain: f64,
    pub mean_effective_stress: f64,
    pub broken_bonds: usize,
    pub new_bonds: usize,
    pub plastic_fraction: f64,
}
