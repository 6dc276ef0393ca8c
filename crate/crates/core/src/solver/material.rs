use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use super::SolverError;
use crate::constitutive::{stress_from_total_strain, OntologyConstants, PhasonTensor, PhononTensor, StrainState, StressState};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Law {
    /// Isotropic linear map from the elastic branch, plus plastic eigenstrain.
    #[default]
    Elastic,
    /// Secant total-deformation relation; no plastic state.
    TotalDeformation,
}

pub(crate) fn isotropic(m: &Matrix3<f64>, c: &OntologyConstants) -> Matrix3<f64> {
    let tr = m.trace();
    let mut dev = *m;
    for i in 0..3 {
        dev[(i, i)] -= tr / 3.0;
    }
    2.0 * c.shear_modulus() * dev + Matrix3::from_diagonal_element(c.bulk * tr)
}

/// `s = 2G dev ε + κ tr ε I` and the same map on the phason strain.
pub fn elastic_stress(strain: &StrainState, c: &OntologyConstants) -> StressState {
    StressState {
        phonon: PhononTensor::from_matrix(isotropic(strain.phonon.matrix(), c)),
        phason: PhasonTensor::from_matrix(isotropic(strain.phason.matrix(), c)),
    }
}

pub fn node_stress(strain: &StrainState, c: &OntologyConstants, law: Law) -> Result<StressState, SolverError> {
    match law {
        Law::Elastic => Ok(elastic_stress(strain, c)),
        Law::TotalDeformation => Ok(stress_from_total_strain(strain, c)?),
    }
}

pub(crate) fn scaled(st: StressState, f: f64) -> StressState {
    StressState {
        phonon: st.phonon.scale(f),
        phason: st.phason.scale(f),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constitutive::{effective_stress, total_deformation_state};

    fn consts() -> OntologyConstants {
        OntologyConstants {
            s_0: 1.0,
            a: 1.0,
            n: 3.0,
            e_el: 3.0,
            bulk: 2.0,
            phason_coupling: 0.5,
            enforce_continuity: true,
        }
    }

    #[test]
    fn uniaxial_elastic_values() {
        let e = StrainState {
            phonon: PhononTensor::diag(0.01, 0.0, 0.0),
            phason: PhasonTensor::zero(),
        };
        let s = elastic_stress(&e, &consts());
        // 2G = 2, κ = 2: s11 = 2(2/3)(0.01) + 0.02, s22 = -2(1/3)(0.01) + 0.02
        assert!((s.phonon.get(0, 0) - (0.04 / 3.0 + 0.02)).abs() < 1e-15);
        assert!((s.phonon.get(1, 1) - (0.02 - 0.02 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn laws_agree_in_elastic_branch() {
        let c = consts();
        let e = StrainState {
            phonon: PhononTensor::diag(0.02, -0.01, 0.003),
            phason: PhasonTensor::from_row_major(&[0.0, 0.01, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
        };
        let a = node_stress(&e, &c, Law::Elastic).unwrap();
        let b = node_stress(&e, &c, Law::TotalDeformation).unwrap();
        assert!(effective_stress(&a, &c).s_eff < c.s_0);
        assert!((a.phonon.sub(&b.phonon)).norm() < 1e-12);
        assert!((a.phason.sub(&b.phason)).norm() < 1e-12);
        let back = total_deformation_state(&b, &c);
        assert!(back.phonon.sub(&e.phonon).norm() < 1e-12);
    }

    #[test]
    fn volumetric_strain() {
        let c = consts();
        let e = StrainState {
            phonon: PhononTensor::diag(0.01, 0.01, 0.01),
            phason: PhasonTensor::zero(),
        };
        for law in [Law::Elastic, Law::TotalDeformation] {
            let s = node_stress(&e, &c, law).unwrap();
            assert!((s.phonon.trace() - 9.0 * c.bulk * 0.01).abs() < 1e-14);
            assert!(s.phonon.deviator().norm() < 1e-14);
        }
    }

    #[test]
    fn total_deformation_round_trip() {
        let c = consts();
        let st = StressState {
            phonon: PhononTensor::diag(4.0, -1.0, 0.5),
            phason: PhasonTensor::from_row_major(&[0.0, 0.7, 0.0, -0.2, 0.0, 0.0, 0.0, 0.0, 0.3]),
        };
        assert!(effective_stress(&st, &c).s_eff > c.s_0);
        let back = node_stress(&total_deformation_state(&st, &c), &c, Law::TotalDeformation).unwrap();
        assert!(back.phonon.sub(&st.phonon).norm() < 1e-9);
        assert!(back.phason.sub(&st.phason).norm() < 1e-9);
    }
}
