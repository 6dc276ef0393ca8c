use nalgebra::{Matrix3, SymmetricEigen, Vector3};

use super::{LatticeField, SolverError};
use crate::constitutive::{PhasonTensor, PhononTensor, StrainState, StressState};
use crate::lattice::FsnLattice;

/// Smallest-to-largest eigenvalue ratio of the stencil moment matrix below
/// which the neighbor offsets are treated as not spanning 3D.
const RANK_RATIO: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct Stencil {
    pub neighbors: Vec<usize>,
    /// `∇f(x_i) ≈ Σ_j (f_j − f_i) ⊗ a_j`.
    pub coeffs: Vec<Vector3<f64>>,
    /// Offsets (even after widening to second neighbors) do not span 3D.
    pub degenerate: bool,
    /// Second neighbors were needed.
    pub widened: bool,
}

impl Stencil {
    fn empty() -> Self {
        Self {
            neighbors: Vec::new(),
            coeffs: Vec::new(),
            degenerate: true,
            widened: false,
        }
    }
}

/// Weighted least-squares gradient and divergence over intact bonds.
#[derive(Debug, Clone)]
pub struct GradientOperator {
    stencils: Vec<Stencil>,
}

fn offset(lattice: &FsnLattice, i: usize, j: usize) -> Vector3<f64> {
    Vector3::from(lattice.nodes[j].coords) - Vector3::from(lattice.nodes[i].coords)
}

fn fit(lattice: &FsnLattice, i: usize, members: &[(usize, f64)]) -> Option<Vec<Vector3<f64>>> {
    let mut m = Matrix3::zeros();
    for &(j, w) in members {
        let d = offset(lattice, i, j);
        m += w * d * d.transpose();
    }
    let eig = SymmetricEigen::new(m);
    let max = eig.eigenvalues.max();
    let min = eig.eigenvalues.min();
    if !(max > 0.0) || min / max < RANK_RATIO {
        return None;
    }
    let inv = m.try_inverse()?;
    Some(members.iter().map(|&(j, w)| w * (inv * offset(lattice, i, j))).collect())
}

impl GradientOperator {
    pub fn new(lattice: &FsnLattice) -> Self {
        let adj = lattice.adjacency();
        let stencils = (0..lattice.len())
            .map(|i| {
                let mut ring: Vec<(usize, f64)> = Vec::new();
                for &(j, b) in &adj[i] {
                    let d2 = offset(lattice, i, j).norm_squared();
                    if d2 > 0.0 && !ring.iter().any(|&(k, _)| k == j) {
                        ring.push((j, lattice.bonds[b].stiffness / d2));
                    }
                }
                if ring.is_empty() {
                    return Stencil::empty();
                }
                if let Some(coeffs) = fit(lattice, i, &ring) {
                    return Stencil {
                        neighbors: ring.iter().map(|r| r.0).collect(),
                        coeffs,
                        degenerate: false,
                        widened: false,
                    };
                }
                let first = ring.clone();
                for &(j, _) in &first {
                    for &(k, b) in &adj[j] {
                        if k == i || ring.iter().any(|&(r, _)| r == k) {
                            continue;
                        }
                        let d2 = offset(lattice, i, k).norm_squared();
                        if d2 > 0.0 {
                            let s1 = first.iter().find(|r| r.0 == j).map_or(0.0, |r| r.1 * offset(lattice, i, j).norm_squared());
                            ring.push((k, s1.min(lattice.bonds[b].stiffness) / d2));
                        }
                    }
                }
                match fit(lattice, i, &ring) {
                    Some(coeffs) => Stencil {
                        neighbors: ring.iter().map(|r| r.0).collect(),
                        coeffs,
                        degenerate: false,
                        widened: true,
                    },
                    None => Stencil { widened: true, ..Stencil::empty() },
                }
            })
            .collect();
        Self { stencils }
    }

    pub fn len(&self) -> usize {
        self.stencils.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stencils.is_empty()
    }

    pub fn stencil(&self, i: usize) -> &Stencil {
        &self.stencils[i]
    }

    pub fn is_degenerate(&self, i: usize) -> bool {
        self.stencils[i].degenerate
    }

    /// `G[r][c] = ∂v_r/∂x_c` at node `i`; zero on degenerate nodes.
    pub fn gradient(&self, i: usize, values: &[Vector3<f64>]) -> Matrix3<f64> {
        let s = &self.stencils[i];
        let mut g = Matrix3::zeros();
        for (&j, a) in s.neighbors.iter().zip(&s.coeffs) {
            g += (values[j] - values[i]) * a.transpose();
        }
        g
    }

    /// `(div T)_r = Σ_c ∂T_rc/∂x_c` at node `i`.
    pub fn divergence(&self, i: usize, tensors: &[Matrix3<f64>]) -> Vector3<f64> {
        let s = &self.stencils[i];
        let mut d = Vector3::zeros();
        for (&j, a) in s.neighbors.iter().zip(&s.coeffs) {
            d += (tensors[j] - tensors[i]) * a;
        }
        d
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrainField {
    pub strains: Vec<StrainState>,
    pub degenerate: Vec<bool>,
    /// Number of degenerate nodes; each one is also logged as a warning.
    pub warnings: usize,
}

fn check_len(lattice: &FsnLattice, got: usize) -> Result<(), SolverError> {
    if got != lattice.len() {
        return Err(SolverError::SizeMismatch { expected: lattice.len(), got });
    }
    Ok(())
}

pub(crate) fn strains_with(op: &GradientOperator, field: &LatticeField) -> Vec<StrainState> {
    (0..op.len())
        .map(|i| {
            if op.is_degenerate(i) {
                return StrainState::zero();
            }
            StrainState {
                phonon: PhononTensor::from_matrix(op.gradient(i, &field.u)),
                phason: PhasonTensor::from_matrix(op.gradient(i, &field.w)),
            }
        })
        .collect()
}

/// Symmetric phonon strain and full phason gradient at every node.
/// Nodes whose stencil is rank-deficient get zero strain and a warning.
pub fn compute_strains(lattice: &FsnLattice, field: &LatticeField) -> Result<StrainField, SolverError> {
    check_len(lattice, field.u.len())?;
    check_len(lattice, field.w.len())?;
    let op = GradientOperator::new(lattice);
    let degenerate: Vec<bool> = (0..op.len()).map(|i| op.is_degenerate(i)).collect();
    let warnings = degenerate.iter().filter(|d| **d).count();
    for (i, _) in degenerate.iter().enumerate().filter(|(_, d)| **d) {
        log::warn!("node {i}: neighbor offsets do not span 3D, strain set to zero");
    }
    Ok(StrainField {
        strains: strains_with(&op, field),
        degenerate,
        warnings,
    })
}

pub(crate) fn residual_with(op: &GradientOperator, stresses: &[StressState]) -> Vec<(Vector3<f64>, Vector3<f64>)> {
    let s: Vec<Matrix3<f64>> = stresses.iter().map(|t| *t.phonon.matrix()).collect();
    let k: Vec<Matrix3<f64>> = stresses.iter().map(|t| *t.phason.matrix()).collect();
    (0..op.len())
        .map(|i| {
            if op.is_degenerate(i) {
                (Vector3::zeros(), Vector3::zeros())
            } else {
                (op.divergence(i, &s), op.divergence(i, &k))
            }
        })
        .collect()
}

/// Discrete `(div s, div K)` at every node.
pub fn equilibrium_residual(
    lattice: &FsnLattice,
    stresses: &[StressState],
) -> Result<Vec<(Vector3<f64>, Vector3<f64>)>, SolverError> {
    check_len(lattice, stresses.len())?;
    Ok(residual_with(&GradientOperator::new(lattice), stresses))
}

/// Max over interior nodes of `sqrt(|div s|² + |div K|²)`.
pub fn interior_residual_norm(lattice: &FsnLattice, residuals: &[(Vector3<f64>, Vector3<f64>)]) -> f64 {
    residuals
        .iter()
        .enumerate()
        .filter(|(i, _)| !lattice.is_boundary(*i))
        .map(|(_, (a, b))| (a.norm_squared() + b.norm_squared()).sqrt())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_bethe, BetheLatticeSpec};
    use proptest::prelude::*;

    fn lattice() -> FsnLattice {
        build_bethe(&BetheLatticeSpec::new(3, 4, 11)).unwrap()
    }

    #[test]
    fn interior_stencils_span_and_leaves_widen() {
        let l = lattice();
        let op = GradientOperator::new(&l);
        for i in 0..l.len() {
            assert!(!op.is_degenerate(i), "node {i}");
            assert_eq!(op.stencil(i).widened, l.is_boundary(i));
        }
    }

    #[test]
    fn isolated_node_is_degenerate() {
        let mut l = lattice();
        let leaf = l.len() - 1;
        for b in l.bonds.iter_mut().filter(|b| b.a == leaf || b.b == leaf) {
            b.intact = false;
        }
        let f = compute_strains(&l, &LatticeField::zeros(l.len())).unwrap();
        assert!(f.degenerate[leaf]);
        // the sibling leaf now sees only its parent and grandparent
        assert!(f.degenerate[leaf - 1]);
        assert_eq!(f.warnings, 2);
    }

    #[test]
    fn size_mismatch() {
        let l = lattice();
        assert!(matches!(
            compute_strains(&l, &LatticeField::zeros(3)),
            Err(SolverError::SizeMismatch { .. })
        ));
    }

    #[test]
    fn linear_stress_has_constant_divergence() {
        let l = lattice();
        // s(x) = S + x_0 A + x_1 B with symmetric A, B
        let a = Matrix3::new(1.0, 0.5, 0.0, 0.5, -2.0, 0.3, 0.0, 0.3, 0.7);
        let b = Matrix3::new(0.2, -1.0, 0.4, -1.0, 0.0, 0.0, 0.4, 0.0, 1.5);
        let base = Matrix3::new(3.0, 1.0, 0.0, 1.0, 2.0, 0.0, 0.0, 0.0, 1.0);
        let stresses: Vec<StressState> = l
            .nodes
            .iter()
            .map(|n| {
                let m = base + a * n.coords[0] + b * n.coords[1];
                StressState { phonon: PhononTensor::from_matrix(m), phason: PhasonTensor::from_matrix(m) }
            })
            .collect();
        let expected = a.column(0) + b.column(1);
        for (dp, dk) in equilibrium_residual(&l, &stresses).unwrap() {
            assert!((dp - expected).amax() <= 1e-8);
            assert!((dk - expected).amax() <= 1e-8);
        }
    }

    #[test]
    fn perturbation_stays_local() {
        let l = lattice();
        let op = GradientOperator::new(&l);
        let hit = 5;
        let mut stresses = vec![StressState::zero(); l.len()];
        stresses[hit].phonon = PhononTensor::diag(1.0, 0.0, 0.0);
        let r = equilibrium_residual(&l, &stresses).unwrap();
        for (i, (dp, dk)) in r.iter().enumerate() {
            let touches = i == hit || op.stencil(i).neighbors.contains(&hit);
            if !touches {
                assert_eq!(dp.norm() + dk.norm(), 0.0, "node {i}");
            }
        }
        assert!(r[hit].0.norm() > 0.0);
    }

    proptest! {
        #[test]
        fn affine_fields_are_reproduced(g in proptest::array::uniform9(-1.0f64..1.0), h in proptest::array::uniform9(-1.0f64..1.0)) {
            let l = lattice();
            let gu = Matrix3::from_row_slice(&g);
            let gw = Matrix3::from_row_slice(&h);
            let coords: Vec<[f64; 3]> = l.nodes.iter().map(|n| n.coords).collect();
            let field = LatticeField::affine(&coords, &gu, &gw);
            let s = compute_strains(&l, &field).unwrap();
            let sym = 0.5 * (gu + gu.transpose());
            for st in &s.strains {
                prop_assert!((st.phonon.matrix() - sym).amax() < 1e-10);
                prop_assert!((st.phason.matrix() - gw).amax() < 1e-10);
            }
        }

        #[test]
        fn uniform_stress_has_zero_divergence(a in proptest::array::uniform9(-10.0f64..10.0)) {
            let l = lattice();
            let st = StressState { phonon: PhononTensor::from_row_major(&a), phason: PhasonTensor::from_row_major(&a) };
            let r = equilibrium_residual(&l, &vec![st; l.len()]).unwrap();
            prop_assert!(interior_residual_norm(&l, &r) <= 1e-12);
        }
    }
}
