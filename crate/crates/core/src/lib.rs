//! Folksodriven Structure Networks (FSNs): folksonomy tag events turned into
//! Bethe-lattice networks and loaded quasi-statically under phonon/phason
//! elasto-plastic laws.
//!
//! The crate is organised bottom-up:
//!
//! - [`ingest`]: tag events, click-through exposition, tokenizer, formal
//!   contexts and their concepts, FD tags.
//! - [`lattice`]: Bethe lattice generation, shell counts, distances,
//!   (C, E, R) embedding, tag assignment and ontology matching.
//! - [`constitutive`]: creep law, effective stress, yield surface, incremental
//!   flow and total-deformation relations.
//! - [`solver`]: gradient recovery on the lattice, equilibrium, loading runs
//!   with yield, fracture and rewiring.
//! - [`cli`]: configuration files, manifests and the `fsn` command surface.
//!
//! Runnable walkthroughs for each capability live in `examples/`.

pub mod cli;
pub mod constitutive;
pub mod ingest;
pub mod lattice;
pub mod solver;

pub use constitutive::{
    CreepParams, FlowModel, OntologyConstants, PhasonTensor, PhononTensor, StrainState,
    StressState, YieldModel,
};
pub use ingest::{Concept, FdTag, FormalContext, TagEvent};
pub use lattice::{BetheLatticeSpec, FsnLattice};
pub use solver::{CurveSample, EventLog, LatticeField, LoadProgram, Models};
