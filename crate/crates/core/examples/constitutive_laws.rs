//! Creep rate, effective stress, yield check and flow direction for one
//! stress state.

use fsn::constitutive::{
    creep_rate, effective_stress, plastic_flow_increment, total_deformation_state, yield_function,
    yield_gradients, CreepOrientation, CreepParams, FlowModel, ModulusMode, OntologyConstants, PhasonTensor,
    PhononTensor, StressState, YieldModel,
};

fn main() {
    let c = OntologyConstants {
        s_0: 1.0,
        a: 1.0,
        n: 3.0,
        e_el: 1.5,
        bulk: 1.0,
        phason_coupling: 0.5,
        enforce_continuity: true,
    };
    let st = StressState {
        phonon: PhononTensor::diag(1.2, 0.1, -0.3),
        phason: PhasonTensor::from_row_major(&[0.0, 0.2, 0.0, 0.0, 0.0, 0.0, 0.1, 0.0, 0.0]),
    };

    let eff = effective_stress(&st, &c);
    println!("S_e {:.4}  f(K) {:.4}  S_eff {:.4}", eff.s_e, eff.f_k, eff.s_eff);

    for orientation in [CreepOrientation::AsPrinted, CreepOrientation::Inverted] {
        let p = CreepParams { b: 0.006, m: 6.0, s_hat: 0.785, orientation };
        println!("creep rate ({orientation:?}) {:.4e}", creep_rate(eff.s_eff, &p).unwrap());
    }

    let y = YieldModel::perfect(0.3);
    println!("Omega {:.4}", yield_function(eff.s_eff, &y));
    let g = yield_gradients(&st, &c);
    println!("dOmega/ds trace {:.1e}", g.phonon.trace());

    let flow = FlowModel { modulus_mode: ModulusMode::RambergOsgoodConsistent, k0: 1.0 };
    let (de, dw) = plastic_flow_increment(&st, 0.01, &flow, &y, &c).unwrap();
    println!("plastic increment |de| {:.3e} |dw| {:.3e}", de.norm(), dw.norm());

    let total = total_deformation_state(&st, &c);
    println!("total strain e11 {:.4} w12 {:.4}", total.phonon.get(0, 0), total.phason.get(0, 1));
}
