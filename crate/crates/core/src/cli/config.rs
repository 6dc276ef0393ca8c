use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::CliError;
use crate::constitutive::{
    CreepOrientation, CreepParams, FlowModel, HardeningMode, ModulusMode, OntologyConstants, YieldModel,
};
use crate::ingest::ContextRoles;
use crate::lattice::{AssignStrategy, BetheLatticeSpec, DistanceKind, Signature, DEFAULT_NODE_BOUND};
use crate::solver::{Law, LoadMode, LoadProgram, Models, Rewire, SolveOptions};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IngestSection {
    /// JSONL tag events; when set, `build` and `simulate` place their FD tags on the lattice.
    pub events: Option<PathBuf>,
    pub roles: ContextRoles,
}

impl Default for IngestSection {
    fn default() -> Self {
        Self {
            events: None,
            roles: ContextRoles::ResourcesAsObjects,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LatticeSection {
    pub z: usize,
    pub k_max: usize,
    pub seed: u64,
    pub assign: AssignStrategy,
    pub node_bound: usize,
}

impl Default for LatticeSection {
    fn default() -> Self {
        Self {
            z: 3,
            k_max: 5,
            seed: 42,
            assign: AssignStrategy::Bfs,
            node_bound: DEFAULT_NODE_BOUND,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmbeddingSection {
    pub signature: Signature,
    pub distance: DistanceKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CreepSection {
    pub enabled: bool,
    pub b: f64,
    pub m: f64,
    pub s_hat: f64,
    pub orientation: CreepOrientation,
}

impl Default for CreepSection {
    fn default() -> Self {
        Self {
            enabled: true,
            b: 0.006,
            m: 6.0,
            s_hat: 0.785,
            orientation: CreepOrientation::Inverted,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct YieldSection {
    pub mode: HardeningMode,
    pub s_y: f64,
    pub h: f64,
}

impl Default for YieldSection {
    fn default() -> Self {
        Self {
            mode: HardeningMode::Perfect,
            s_y: 0.3,
            h: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowSection {
    pub modulus_mode: ModulusMode,
    pub k0: f64,
}

impl Default for FlowSection {
    fn default() -> Self {
        Self {
            modulus_mode: ModulusMode::Constant,
            k0: 1000.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub law: Law,
    pub tol: f64,
    pub max_iter: usize,
    pub damping: f64,
    pub stabilization: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        let o = SolveOptions::default();
        Self {
            law: Law::Elastic,
            tol: o.tol,
            max_iter: o.max_iter,
            damping: o.damping,
            stabilization: o.stabilization,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub rates: Vec<f64>,
    pub seeds: Vec<u64>,
    /// Worker threads; 0 uses the available parallelism.
    pub workers: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            rates: vec![1e-3, 1e-2],
            seeds: vec![42],
            workers: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: PathBuf::from("out") }
    }
}

fn default_constants() -> OntologyConstants {
    OntologyConstants {
        s_0: 1.0,
        a: 1.0,
        n: 3.0,
        e_el: 1.5,
        bulk: 1.0,
        phason_coupling: 0.5,
        enforce_continuity: true,
    }
}

fn default_load() -> LoadProgram {
    LoadProgram {
        mode: LoadMode::StrainControlled,
        strain_rate: 1e-2,
        target_strain: 2.0,
        steps: 200,
        fracture_threshold: 1.2,
        rewire: Rewire::Off,
        rewire_budget: 0,
        seed: 42,
        phonon_direction: [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        phason_direction: [0.0; 9],
        stiffness_jitter: 0.1,
    }
}

fn overlay(base: &mut toml::Table, top: toml::Table) {
    for (key, value) in top {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(t)) => overlay(b, t),
            (_, v) => {
                base.insert(key, v);
            }
        }
    }
}

/// Everything a run needs. Defaults are the calibrated loading parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub ingest: IngestSection,
    #[serde(default)]
    pub lattice: LatticeSection,
    #[serde(default)]
    pub embedding: EmbeddingSection,
    #[serde(default = "default_constants")]
    pub constants: OntologyConstants,
    #[serde(default)]
    pub creep: CreepSection,
    #[serde(default, rename = "yield")]
    pub yield_: YieldSection,
    #[serde(default)]
    pub flow: FlowSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default = "default_load")]
    pub load: LoadProgram,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub output: OutputSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            ingest: IngestSection::default(),
            lattice: LatticeSection::default(),
            embedding: EmbeddingSection::default(),
            constants: default_constants(),
            creep: CreepSection::default(),
            yield_: YieldSection::default(),
            flow: FlowSection::default(),
            solver: SolverSection::default(),
            load: default_load(),
            sweep: SweepSection::default(),
            output: OutputSection::default(),
        }
    }
}

impl RunConfig {
    /// Parses a config; keys missing from any section keep their defaults.
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let err = |e: &dyn std::fmt::Display| CliError::Validation(format!("config: {e}"));
        let given: toml::Table = text.parse().map_err(|e| err(&e))?;
        let mut merged = toml::Table::try_from(Self::default()).expect("defaults serialize");
        overlay(&mut merged, given);
        merged.try_into().map_err(|e| err(&e))
    }

    /// Reads a config file; relative paths inside it resolve against its directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut cfg = Self::from_toml(&text)?;
        if let (Some(events), Some(dir)) = (&cfg.ingest.events, path.parent()) {
            if events.is_relative() {
                cfg.ingest.events = Some(dir.join(events));
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Overrides both the lattice layout seed and the load program seed.
    pub fn set_seed(&mut self, seed: u64) {
        self.lattice.seed = seed;
        self.load.seed = seed;
    }

    pub fn lattice_spec(&self) -> BetheLatticeSpec {
        BetheLatticeSpec::new(self.lattice.z, self.lattice.k_max, self.lattice.seed)
    }

    pub fn models(&self) -> Models {
        Models {
            constants: self.constants,
            yield_model: YieldModel {
                mode: self.yield_.mode,
                s_y: self.yield_.s_y,
                h: self.yield_.h,
                k: 0.0,
            },
            flow: FlowModel {
                modulus_mode: self.flow.modulus_mode,
                k0: self.flow.k0,
            },
            creep: self.creep.enabled.then_some(CreepParams {
                b: self.creep.b,
                m: self.creep.m,
                s_hat: self.creep.s_hat,
                orientation: self.creep.orientation,
            }),
            law: self.solver.law,
            solver: SolveOptions {
                tol: self.solver.tol,
                max_iter: self.solver.max_iter,
                damping: self.solver.damping,
                stabilization: self.solver.stabilization,
            },
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let v = |e: &dyn std::fmt::Display| CliError::Validation(e.to_string());
        self.lattice_spec().validate().map_err(|e| v(&e))?;
        self.models().validate().map_err(|e| v(&e))?;
        self.load.validate().map_err(|e| v(&e))?;
        if let Some(p) = &self.ingest.events {
            if !p.is_file() {
                return Err(CliError::Validation(format!("ingest.events `{}` does not exist", p.display())));
            }
        }
        if self.sweep.rates.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
            return Err(CliError::Validation("sweep.rates must be positive".into()));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form. Struct fields serialize in
    /// declaration order, so the hash ignores key order in the source file.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_roundtrip_through_toml() {
        let d = RunConfig::default();
        let back = RunConfig::from_toml(&d.to_toml()).unwrap();
        assert_eq!(back, d);
        assert_eq!(RunConfig::from_toml("").unwrap(), d);
        d.validate().unwrap();
    }

    #[test]
    fn hash_ignores_key_order() {
        let a = RunConfig::from_toml("[lattice]\nz = 4\nk_max = 3\n[load]\nstrain_rate = 0.1\ntarget_strain = 1.0\nsteps = 10\nfracture_threshold = 2.0\n").unwrap();
        let b = RunConfig::from_toml("[load]\nfracture_threshold = 2.0\nsteps = 10\ntarget_strain = 1.0\nstrain_rate = 0.1\n[lattice]\nk_max = 3\nz = 4\n").unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), RunConfig::default().hash());
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(matches!(RunConfig::from_toml("[lattice]\nzz = 3\n"), Err(CliError::Validation(_))));
        let c = RunConfig::from_toml("[lattice]\nz = 1\n").unwrap();
        let err = c.validate().unwrap_err().to_string();
        assert!(err.contains("z"), "{err}");
    }

    #[test]
    fn partial_sections_keep_defaults() {
        let c = RunConfig::from_toml("[load]\nsteps = 7\n[constants]\nn = 5.0\n").unwrap();
        let d = RunConfig::default();
        assert_eq!(c.load.steps, 7);
        assert_eq!(c.load.strain_rate, d.load.strain_rate);
        assert_eq!(c.constants.n, 5.0);
        assert_eq!(c.constants.bulk, d.constants.bulk);
        assert!(RunConfig::from_toml("[load]\nbogus = 1\n").is_err());
        assert!(RunConfig::from_toml("[constants]\nbogus = 1\n").is_err());
    }

    #[test]
    fn infinite_threshold_is_accepted() {
        let c = RunConfig::from_toml("[load]\nstrain_rate = 0.01\ntarget_strain = 1.0\nsteps = 10\nfracture_threshold = inf\n").unwrap();
        assert!(c.load.fracture_threshold.is_infinite());
        c.validate().unwrap();
    }
}
