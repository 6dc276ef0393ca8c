//! Integrate the incremental flow rule along a proportional stress path and
//! compare with the total-deformation strain at the end point.

use fsn::constitutive::{
    effective_stress, plastic_flow_increment, total_deformation_state, FlowModel, ModulusMode, OntologyConstants,
    PhasonTensor, PhononTensor, StrainState, StressState, YieldModel,
};

fn main() {
    let steps = 10_000;
    let dir = PhononTensor::diag(2.0, -0.5, 0.25);
    for n in [1.0, 3.0, 5.0] {
        let c = OntologyConstants { s_0: 1.0, a: 1.0, n, e_el: 2.0, bulk: 1.5, phason_coupling: 0.5, enforce_continuity: true };
        let unit = effective_stress(&StressState::phonon_only(dir), &c).s_eff;
        let at = |s: f64| StressState::phonon_only(dir.scale(s / unit));
        let flow = FlowModel { modulus_mode: ModulusMode::RambergOsgoodConsistent, k0: 1.0 };
        let y = YieldModel::perfect(c.s_0);

        let (start, end) = (c.s_0, 3.0 * c.s_0);
        let ds = (end - start) / steps as f64;
        let mut strain = total_deformation_state(&at(start), &c);
        for k in 0..steps {
            let s = start + (k as f64 + 0.5) * ds;
            let (dp, _) = plastic_flow_increment(&at(s), ds, &flow, &y, &c).unwrap();
            let vol = (at(s + 0.5 * ds).phonon.trace() - at(s - 0.5 * ds).phonon.trace()) / (9.0 * c.bulk);
            strain = strain.add(&StrainState {
                phonon: dp.add(&PhononTensor::identity().scale(vol)),
                phason: PhasonTensor::zero(),
            });
        }
        let target = total_deformation_state(&at(end), &c);
        let gap = strain.sub(&target).phonon.norm() / target.phonon.norm();
        println!("n={n}: e11 flow {:.6} deformation {:.6} relative gap {gap:.2e}", strain.phonon.get(0, 0), target.phonon.get(0, 0));
    }
}
