use super::{
    effective_strain_derivative, ConstitutiveError, CreepOrientation, CreepParams, FlowModel, ModulusMode,
    OntologyConstants, PhasonTensor, PhononTensor, StressState, YieldModel,
};

/// Below this the von Mises stress (or the phason norm) is treated as zero and
/// the corresponding gradient is undefined.
const DEGENERATE: f64 = 1e-300;

pub fn creep_rate(s: f64, p: &CreepParams) -> Result<f64, ConstitutiveError> {
    if !(s > 0.0) {
        return Err(ConstitutiveError::Domain(format!("creep rate needs s > 0, got {s}")));
    }
    let ratio = match p.orientation {
        CreepOrientation::AsPrinted => p.s_hat / s,
        CreepOrientation::Inverted => s / p.s_hat,
    };
    Ok(p.b * ratio.powf(p.m))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveStress {
    /// von Mises stress of the phonon deviator.
    pub s_e: f64,
    /// Phason contribution `α ‖K‖`.
    pub f_k: f64,
    pub s_eff: f64,
}

pub fn effective_stress(st: &StressState, c: &OntologyConstants) -> EffectiveStress {
    let dev = st.phonon.deviator();
    let s_e = (1.5 * dev.ddot(&dev)).sqrt();
    let f_k = c.phason_coupling * st.phason.norm();
    EffectiveStress { s_e, f_k, s_eff: s_e + f_k }
}

/// `Ω = S_eff − Y(k)`.
pub fn yield_function(s_eff: f64, y: &YieldModel) -> f64 {
    s_eff - y.yield_stress()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YieldGradients {
    pub phonon: PhononTensor,
    pub phason: PhasonTensor,
    /// `S_e` vanished; the phonon gradient was set to zero.
    pub phonon_degenerate: bool,
    /// `‖K‖` vanished; the phason gradient was set to zero.
    pub phason_degenerate: bool,
}

/// `∂Ω/∂s = (3/2) s′ / S_e` and `∂Ω/∂K = α K / ‖K‖`.
pub fn yield_gradients(st: &StressState, c: &OntologyConstants) -> YieldGradients {
    let dev = st.phonon.deviator();
    let s_e = (1.5 * dev.ddot(&dev)).sqrt();
    let (phonon, phonon_degenerate) = if s_e > DEGENERATE {
        (st.phonon.scale(1.5 / s_e).deviator(), false)
    } else {
        (PhononTensor::zero(), true)
    };
    let k_norm = st.phason.norm();
    let (phason, phason_degenerate) = if k_norm > DEGENERATE {
        (st.phason.scale(c.phason_coupling / k_norm), false)
    } else {
        (PhasonTensor::zero(), true)
    };
    YieldGradients {
        phonon,
        phason,
        phonon_degenerate,
        phason_degenerate,
    }
}

/// Clustering modulus `K(S_eff)` of the flow rule.
pub fn clustering_modulus(s_eff: f64, f: &FlowModel, c: &OntologyConstants) -> Result<f64, ConstitutiveError> {
    let k = match f.modulus_mode {
        ModulusMode::Constant => f.k0,
        ModulusMode::RambergOsgoodConsistent => 1.0 / effective_strain_derivative(s_eff, c),
    };
    if k > 0.0 {
        Ok(k)
    } else {
        Err(ConstitutiveError::Model(format!("clustering modulus must be positive, got {k}")))
    }
}

/// Plastic strain rates from the incremental flow rule.
///
/// Zero unless the state is on or outside the yield surface and loading
/// (`dS_eff > 0`).
pub fn plastic_flow_increment(
    st: &StressState,
    ds_eff: f64,
    f: &FlowModel,
    y: &YieldModel,
    c: &OntologyConstants,
) -> Result<(PhononTensor, PhasonTensor), ConstitutiveError> {
    let eff = effective_stress(st, c);
    if yield_function(eff.s_eff, y) < 0.0 || !(ds_eff > 0.0) {
        return Ok((PhononTensor::zero(), PhasonTensor::zero()));
    }
    let modulus = clustering_modulus(eff.s_eff, f, c)?;
    let g = yield_gradients(st, c);
    let factor = ds_eff / modulus;
    Ok((g.phonon.scale(factor), g.phason.scale(factor)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constitutive::HardeningMode;
    use nalgebra::Matrix3;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn consts(alpha: f64) -> OntologyConstants {
        OntologyConstants {
            s_0: 1.0,
            a: 0.01,
            n: 3.0,
            e_el: 100.0,
            bulk: 50.0,
            phason_coupling: alpha,
            enforce_continuity: true,
        }
    }

    fn creep(orientation: CreepOrientation) -> CreepParams {
        CreepParams { b: 1.0, m: 2.0, s_hat: 2.0, orientation }
    }

    #[test]
    fn creep_examples() {
        for o in [CreepOrientation::AsPrinted, CreepOrientation::Inverted] {
            let p = CreepParams { b: 3.5, ..creep(o) };
            assert_eq!(creep_rate(2.0, &p).unwrap(), 3.5);
            let p0 = CreepParams { m: 0.0, ..p };
            assert_eq!(creep_rate(17.0, &p0).unwrap(), 3.5);
        }
        assert_eq!(creep_rate(1.0, &creep(CreepOrientation::AsPrinted)).unwrap(), 4.0);
        assert_eq!(creep_rate(1.0, &creep(CreepOrientation::Inverted)).unwrap(), 0.25);
        assert!(creep_rate(0.0, &creep(CreepOrientation::AsPrinted)).is_err());
        assert!(creep_rate(-1.0, &creep(CreepOrientation::AsPrinted)).is_err());
    }

    #[test]
    fn effective_stress_examples() {
        let c = consts(0.7);
        let st = StressState::phonon_only(PhononTensor::from_row_major(&[1., 2., 0., 2., -3., 1., 0., 1., 4.]));
        let e = effective_stress(&st, &c);
        assert_eq!(e.s_eff, e.s_e);

        let hydro = StressState::phonon_only(PhononTensor::diag(5.0, 5.0, 5.0));
        assert!(effective_stress(&hydro, &c).s_eff.abs() < 1e-12);

        // von Mises of diag(σ,0,0): sqrt(3/2 * (4/9 + 1/9 + 1/9) σ²) = |σ|
        let uni = StressState::phonon_only(PhononTensor::diag(2.5, 0.0, 0.0));
        assert!((effective_stress(&uni, &c).s_e - 2.5).abs() < 1e-14);

        let mut k = Matrix3::zeros();
        k[(0, 1)] = 2.0;
        let with_k = StressState { phonon: uni.phonon, phason: PhasonTensor::from_matrix(k) };
        let e = effective_stress(&with_k, &c);
        assert!((e.f_k - 1.4).abs() < 1e-14);
        assert!((e.s_eff - 3.9).abs() < 1e-14);
    }

    #[test]
    fn yield_function_examples() {
        assert_eq!(yield_function(2.0, &YieldModel::perfect(2.0)), 0.0);
        let y = YieldModel::linear(1.0, 2.0);
        assert_eq!(yield_function(0.0, &YieldModel { k: 0.5, ..y }), -2.0);
        let h = YieldModel { mode: HardeningMode::LinearHardening, s_y: 1.0, h: 2.0, k: 0.5 };
        assert_eq!(yield_function(2.5, &h), 0.5);
    }

    /// Central-difference oracle on `effective_stress`, perturbing one matrix
    /// entry at a time. Phonon perturbations go through symmetrization, which
    /// splits `h` over (i,j) and (j,i); the gradient is symmetric so the
    /// quotient still equals the (i,j) entry.
    fn fd_gradients(st: &StressState, c: &OntologyConstants, h: f64) -> (Matrix3<f64>, Matrix3<f64>) {
        let omega = |s: &StressState| effective_stress(s, c).s_eff;
        let mut gs = Matrix3::zeros();
        let mut gk = Matrix3::zeros();
        for i in 0..3 {
            for j in 0..3 {
                let bump = |d: f64| {
                    let mut m = *st.phonon.matrix();
                    m[(i, j)] += d;
                    StressState { phonon: PhononTensor::from_matrix(m), phason: st.phason }
                };
                gs[(i, j)] = (omega(&bump(h)) - omega(&bump(-h))) / (2.0 * h);
                let bumpk = |d: f64| {
                    let mut m = *st.phason.matrix();
                    m[(i, j)] += d;
                    StressState { phonon: st.phonon, phason: PhasonTensor::from_matrix(m) }
                };
                gk[(i, j)] = (omega(&bumpk(h)) - omega(&bumpk(-h))) / (2.0 * h);
            }
        }
        (gs, gk)
    }

    #[test]
    fn gradient_examples() {
        let c = consts(1.0);
        let st = StressState::phonon_only(PhononTensor::diag(3.0, 0.0, 0.0));
        let g = yield_gradients(&st, &c);
        let expected = PhononTensor::diag(1.0, -0.5, -0.5);
        assert!((g.phonon.sub(&expected)).norm() < 1e-14);
        let (fd, _) = fd_gradients(&st, &c, 1e-6);
        assert!((fd - expected.matrix()).norm() < 1e-8);
        assert!(g.phason_degenerate && g.phason.is_zero());

        let zero = yield_gradients(&StressState::zero(), &c);
        assert!(zero.phonon_degenerate);
        assert_eq!(zero.phonon, PhononTensor::zero());

        let mut k = Matrix3::zeros();
        k[(0, 1)] = 0.3;
        let st = StressState { phonon: PhononTensor::diag(1.0, 0.0, 0.0), phason: PhasonTensor::from_matrix(k) };
        let g = yield_gradients(&st, &c);
        let mut e = Matrix3::zeros();
        e[(0, 1)] = 1.0;
        assert!((g.phason.matrix() - e).norm() < 1e-14);
        let (_, fdk) = fd_gradients(&st, &c, 1e-6);
        assert!((fdk - e).norm() < 1e-8);
    }

    #[test]
    fn gradients_match_finite_differences_at_random_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..100 {
            let scale = 10f64.powf(rng.random_range(-2.0..3.0));
            let mut raw = [0.0; 9];
            raw.iter_mut().for_each(|v| *v = rng.random_range(-1.0..1.0) * scale);
            let mut rawk = [0.0; 9];
            rawk.iter_mut().for_each(|v| *v = rng.random_range(-1.0..1.0) * scale);
            let c = consts(rng.random_range(0.1..2.0));
            let st = StressState {
                phonon: PhononTensor::from_row_major(&raw),
                phason: PhasonTensor::from_row_major(&rawk),
            };
            let g = yield_gradients(&st, &c);
            let (fs, fk) = fd_gradients(&st, &c, 1e-6 * scale);
            assert!((fs - g.phonon.matrix()).norm() / g.phonon.norm() < 1e-6);
            assert!((fk - g.phason.matrix()).norm() / g.phason.norm() < 1e-6);
        }
    }

    #[test]
    fn flow_increment_examples() {
        let c = consts(0.0);
        let f = FlowModel { modulus_mode: ModulusMode::Constant, k0: 10.0 };
        let y = YieldModel::perfect(1.0);
        let inside = StressState::phonon_only(PhononTensor::diag(0.5, 0.0, 0.0));
        let (e, w) = plastic_flow_increment(&inside, 1.0, &f, &y, &c).unwrap();
        assert!(e == PhononTensor::zero() && w.is_zero());

        let beyond = StressState::phonon_only(PhononTensor::diag(2.0, 0.0, 0.0));
        let (e, _) = plastic_flow_increment(&beyond, 0.0, &f, &y, &c).unwrap();
        assert_eq!(e, PhononTensor::zero());
        let (e, w) = plastic_flow_increment(&beyond, -1.0, &f, &y, &c).unwrap();
        assert!(e == PhononTensor::zero() && w.is_zero());

        let (e, w) = plastic_flow_increment(&beyond, 1.0, &f, &y, &c).unwrap();
        assert!((e.sub(&PhononTensor::diag(0.1, -0.05, -0.05))).norm() < 1e-15);
        assert!(w.is_zero());
    }

    #[test]
    fn ramberg_osgood_modulus_is_power_tangent() {
        let c = consts(0.0);
        let f = FlowModel { modulus_mode: ModulusMode::RambergOsgoodConsistent, k0: 1.0 };
        // A = 0.01 (continuity with s_0 = 1, E = 100), n = 3: dε/dS = 0.03 S²
        let k = clustering_modulus(2.0, &f, &c).unwrap();
        assert!((k - 1.0 / 0.12).abs() < 1e-12);
    }
}
