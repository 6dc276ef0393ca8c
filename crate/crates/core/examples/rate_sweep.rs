//! Ductility onset against strain rate: slower loading gives creep more time
//! to relax the lattice.

use fsn::cli::RunConfig;
use fsn::lattice::build_bethe_bounded;
use fsn::solver::{ductility_onset, run_loading};

fn main() {
    let cfg = RunConfig::default();
    let lattice = build_bethe_bounded(&cfg.lattice_spec(), cfg.lattice.node_bound).unwrap();
    let models = cfg.models();
    println!("rate,onset_percent,final_stress,broken");
    for rate in [1e-3, 3e-3, 1e-2, 3e-2] {
        let mut load = cfg.load.clone();
        load.strain_rate = rate;
        let out = run_loading(&lattice, &load, &models).unwrap();
        let last = out.samples.last().unwrap();
        println!(
            "{rate:e},{:.1},{:.4},{}",
            ductility_onset(&out.samples).unwrap(),
            last.mean_effective_stress,
            last.broken_bonds
        );
    }
}
