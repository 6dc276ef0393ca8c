//! Material laws for the two deformation channels of an FSN node.
//!
//! Phonon quantities (`s_ij`, `ε_ij`) are symmetric second-order tensors;
//! phason quantities (`K_ij`, `w_ij`) are general 3x3 matrices. The laws are:
//!
//! - power-law creep `ε̇ = B (ŝ/s)^m` ([`creep_rate`]),
//! - generalized effective stress `S_eff = S_e + α‖K‖` ([`effective_stress`]),
//! - yield surface `Ω = S_eff − Y(k)` ([`yield_function`], [`yield_gradients`]),
//! - incremental flow `ε̇ = Ṡ_eff/K(S_eff) · ∂Ω/∂s` ([`plastic_flow_increment`]),
//! - total-deformation relations between deviators
//!   ([`effective_strain`], [`total_deformation_state`], [`stress_from_total_strain`]).

mod deformation;
mod laws;
mod params;
mod tensor;

pub(crate) use deformation::effective_strain_derivative;
pub use deformation::{deviatoric_response, effective_strain, stress_from_total_strain, total_deformation_state};
pub use laws::{
    clustering_modulus, creep_rate, effective_stress, plastic_flow_increment, yield_function, yield_gradients,
    EffectiveStress, YieldGradients,
};
pub use params::{
    CreepOrientation, CreepParams, FlowModel, HardeningMode, ModulusMode, OntologyConstants, YieldModel,
};
pub use tensor::{PhasonTensor, PhononTensor, StrainState, StressState};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConstitutiveError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("model error: {0}")]
    Model(String),
    #[error("total-deformation inversion did not converge in {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
}
