//! Strain-controlled loading with the shipped defaults: stress-strain curve,
//! fractures and the ductility onset.

use fsn::cli::RunConfig;
use fsn::lattice::build_bethe_bounded;
use fsn::solver::{curve_csv, ductility_onset, run_loading, EventKind};

fn main() {
    let cfg = RunConfig::default();
    let lattice = build_bethe_bounded(&cfg.lattice_spec(), cfg.lattice.node_bound).unwrap();
    let out = run_loading(&lattice, &cfg.load, &cfg.models()).unwrap();

    let csv = curve_csv(&out.samples);
    for line in csv.lines().step_by(20) {
        println!("{line}");
    }
    println!(
        "yields {} fractures {}",
        out.log.count(EventKind::Yield),
        out.log.count(EventKind::Fracture)
    );
    println!("ductility onset {:.1}%", ductility_onset(&out.samples).unwrap());
}
