use super::{effective_stress, ConstitutiveError, OntologyConstants, PhasonTensor, PhononTensor, StrainState, StressState};

const MAX_NEWTON: usize = 100;

/// `ε_eff(S_eff)`: linear up to `s_0`, power law `A S^n` beyond.
pub fn effective_strain(s_eff: f64, c: &OntologyConstants) -> f64 {
    if s_eff <= c.s_0 {
        s_eff / c.e_el
    } else {
        c.power_coefficient() * s_eff.powf(c.n)
    }
}

/// Derivative of the power branch, `n A S^(n-1)`. Used as the tangent
/// compliance of the flow rule whatever side of `s_0` the state is on.
pub(crate) fn effective_strain_derivative(s_eff: f64, c: &OntologyConstants) -> f64 {
    c.n * c.power_coefficient() * s_eff.powf(c.n - 1.0)
}

/// Deviatoric strains `(3 ε_eff / 2 S_eff) · dev(s)` and `· dev(K)`; zero when
/// `S_eff = 0`.
pub fn deviatoric_response(st: &StressState, c: &OntologyConstants) -> (PhononTensor, PhasonTensor) {
    let s_eff = effective_stress(st, c).s_eff;
    if s_eff <= 0.0 {
        return (PhononTensor::zero(), PhasonTensor::zero());
    }
    let factor = 1.5 * effective_strain(s_eff, c) / s_eff;
    (st.phonon.scale(factor).deviator(), st.phason.scale(factor).deviator())
}

/// Total strains for a stress state: the deviatoric response plus a linear
/// bulk closure `ε_kk = s_kk / (3 bulk)`, `w_kk = K_kk / (3 bulk)`.
pub fn total_deformation_state(st: &StressState, c: &OntologyConstants) -> StrainState {
    let (dev_e, dev_w) = deviatoric_response(st, c);
    let vol = |trace: f64| trace / (9.0 * c.bulk);
    StrainState {
        phonon: dev_e.add(&PhononTensor::identity().scale(vol(st.phonon.trace()))),
        phason: dev_w.add(&PhasonTensor::from_matrix(nalgebra::Matrix3::identity() * vol(st.phason.trace()))),
    }
}

/// Secant modulus `2 S / (3 ε_eff(S))`, with its `S → 0` limit.
fn secant(s: f64, c: &OntologyConstants) -> f64 {
    if s <= c.s_0 {
        2.0 * c.e_el / 3.0
    } else {
        2.0 * s / (3.0 * effective_strain(s, c))
    }
}

/// Inverts [`total_deformation_state`].
///
/// Volumetric parts invert directly. For the deviators, `dev s = ψ(S) dev ε`
/// and `dev K = ψ(S) dev w` with `ψ` the secant modulus, where the effective
/// stress `S` solves the scalar equation
/// `S = ψ(S) a + α sqrt(ψ(S)² b² + K_kk²/3)`, with `a = sqrt(3/2)‖dev ε‖` and
/// `b = ‖dev w‖`. That equation is solved by safeguarded Newton iteration.
pub fn stress_from_total_strain(strain: &StrainState, c: &OntologyConstants) -> Result<StressState, ConstitutiveError> {
    let dev_e = strain.phonon.deviator();
    let dev_w = strain.phason.deviator();
    let a = (1.5 * dev_e.ddot(&dev_e)).sqrt();
    let b = dev_w.norm();
    let k_kk = 3.0 * c.bulk * strain.phason.trace();
    let cc = k_kk * k_kk / 3.0;
    let alpha = c.phason_coupling;

    let residual = |s: f64| {
        let psi = secant(s, c);
        s - psi * a - alpha * (psi * psi * b * b + cc).sqrt()
    };

    let psi_el = 2.0 * c.e_el / 3.0;
    let s_elastic = psi_el * a + alpha * (psi_el * psi_el * b * b + cc).sqrt();
    let s = if s_elastic <= c.s_0 {
        s_elastic
    } else {
        solve_power_branch(&residual, c)?
    };

    let psi = secant(s, c);
    let vol_s = c.bulk * strain.phonon.trace();
    let vol_k = c.bulk * strain.phason.trace();
    Ok(StressState {
        phonon: dev_e.scale(psi).add(&PhononTensor::identity().scale(vol_s)),
        phason: dev_w.scale(psi).add(&PhasonTensor::from_matrix(nalgebra::Matrix3::identity() * vol_k)),
    })
}

fn solve_power_branch(residual: &dyn Fn(f64) -> f64, c: &OntologyConstants) -> Result<f64, ConstitutiveError> {
    let mut lo = c.s_0;
    if residual(lo * (1.0 + 1e-15)) >= 0.0 {
        // no root beyond s_0: the strain falls in the jump of a discontinuous law
        return Ok(lo);
    }
    let mut hi = 2.0 * c.s_0;
    let mut expansions = 0;
    while residual(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
        expansions += 1;
        if expansions > 2000 || !hi.is_finite() {
            return Err(ConstitutiveError::NoConvergence {
                iterations: expansions,
                residual: residual(lo),
            });
        }
    }
    let mut s = 0.5 * (lo + hi);
    for _ in 0..MAX_NEWTON {
        let f = residual(s);
        if f == 0.0 {
            return Ok(s);
        }
        if f < 0.0 {
            lo = s;
        } else {
            hi = s;
        }
        let h = s * 1e-7;
        let df = (residual(s + h) - residual(s - h)) / (2.0 * h);
        let mut next = s - f / df;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if (next - s).abs() <= 1e-15 * s.abs() || hi - lo <= 4.0 * f64::EPSILON * hi {
            return Ok(next);
        }
        s = next;
    }
    Err(ConstitutiveError::NoConvergence {
        iterations: MAX_NEWTON,
        residual: residual(s),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn consts(alpha: f64, n: f64) -> OntologyConstants {
        OntologyConstants {
            s_0: 1.0,
            a: 0.01,
            n,
            e_el: 100.0,
            bulk: 50.0,
            phason_coupling: alpha,
            enforce_continuity: true,
        }
    }

    #[test]
    fn effective_strain_examples() {
        let c = consts(0.0, 3.0);
        assert_eq!(effective_strain(0.0, &c), 0.0);
        let gap = (c.power_coefficient() * c.s_0.powf(c.n) - c.s_0 / c.e_el).abs();
        assert!(gap <= 1e-12);
        assert!((effective_strain(2.0, &c) - 0.08).abs() < 1e-15);
    }

    #[test]
    fn hydrostatic_and_zero_stress() {
        let c = consts(0.5, 3.0);
        let st = StressState::phonon_only(PhononTensor::diag(3.0, 3.0, 3.0));
        let e = total_deformation_state(&st, &c);
        assert!(e.phonon.deviator().norm() < 1e-15);
        assert!((e.phonon.trace() - 9.0 / 150.0).abs() < 1e-15);
        assert_eq!(total_deformation_state(&StressState::zero(), &c), StrainState::zero());
    }

    #[test]
    fn uniaxial_beyond_proportional_limit() {
        let c = consts(0.0, 3.0);
        let st = StressState::phonon_only(PhononTensor::diag(2.0, 0.0, 0.0));
        let (dev, _) = deviatoric_response(&st, &c);
        let expected = PhononTensor::diag(2.0, 0.0, 0.0).deviator().scale(3.0 * 0.08 / (2.0 * 2.0));
        assert!((dev.sub(&expected)).norm() < 1e-15);
    }

    #[test]
    fn volumetric_strain_closure() {
        let c = consts(0.0, 3.0);
        let e = 0.01;
        let strain = StrainState { phonon: PhononTensor::diag(e, e, e), phason: PhasonTensor::zero() };
        let s = stress_from_total_strain(&strain, &c).unwrap();
        assert!((s.phonon.trace() - 9.0 * c.bulk * e).abs() < 1e-12);
        assert!(s.phonon.deviator().norm() < 1e-12);
    }

    #[test]
    fn zero_phason_stays_zero() {
        let c = consts(0.8, 3.0);
        let st = StressState::phonon_only(PhononTensor::diag(2.0, -1.0, 0.5));
        assert!(total_deformation_state(&st, &c).phason.is_zero());
        let strain = StrainState { phonon: PhononTensor::diag(0.1, 0.0, 0.0), phason: PhasonTensor::zero() };
        assert!(stress_from_total_strain(&strain, &c).unwrap().phason.is_zero());
    }

    fn arb_state() -> impl Strategy<Value = StressState> {
        (proptest::array::uniform9(-5.0f64..5.0), proptest::array::uniform9(-2.0f64..2.0)).prop_map(|(s, k)| {
            StressState { phonon: PhononTensor::from_row_major(&s), phason: PhasonTensor::from_row_major(&k) }
        })
    }

    proptest! {
        #[test]
        fn inversion_roundtrip(st in arb_state(), alpha in 0.0f64..1.5, n in prop::sample::select(vec![1.0, 2.0, 3.0, 5.0])) {
            let c = consts(alpha, n);
            let strain = total_deformation_state(&st, &c);
            let back = stress_from_total_strain(&strain, &c).unwrap();
            let scale = st.phonon.norm() + st.phason.norm() + 1e-30;
            prop_assert!(back.phonon.sub(&st.phonon).norm() / scale < 1e-8);
            prop_assert!(back.phason.sub(&st.phason).norm() / scale < 1e-8);
        }

        #[test]
        fn effective_strain_monotone(a in 0.0f64..10.0, b in 0.0f64..10.0, n in 1.0f64..6.0) {
            let c = consts(0.0, n);
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(effective_strain(lo, &c) <= effective_strain(hi, &c));
        }

        #[test]
        fn emitted_deviators_are_traceless(st in arb_state(), alpha in 0.0f64..1.5) {
            let (e, w) = deviatoric_response(&st, &consts(alpha, 3.0));
            prop_assert!(e.trace().abs() <= 1e-12);
            prop_assert!(w.trace().abs() <= 1e-12);
        }
    }
}
