use nalgebra::{DMatrix, DVector, Matrix3, Vector3, LU, SVD};
use serde::{Deserialize, Serialize};

use super::material::{isotropic, node_stress, scaled};
use super::stencil::{residual_with, strains_with, GradientOperator};
use super::{LatticeField, Models, SolverError};
use crate::constitutive::{OntologyConstants, StrainState, StressState};
use crate::lattice::FsnLattice;

/// Affine displacement gradients imposed on the boundary shell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Boundary {
    pub phonon: Matrix3<f64>,
    pub phason: Matrix3<f64>,
}

impl Boundary {
    pub fn zero() -> Self {
        Self {
            phonon: Matrix3::zeros(),
            phason: Matrix3::zeros(),
        }
    }

    pub fn scaled(phonon: &[f64; 9], phason: &[f64; 9], amount: f64) -> Self {
        Self {
            phonon: Matrix3::from_row_slice(phonon) * amount,
            phason: Matrix3::from_row_slice(phason) * amount,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Relaxation factor `ω` in `u ← u − ω J⁻¹ R(u)`.
    pub damping: f64,
    /// Weight `β` of the bond stabilization; 0 gives plain collocation.
    #[serde(default = "default_stabilization")]
    pub stabilization: f64,
}

fn default_stabilization() -> f64 {
    1.0
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 200,
            damping: 1.0,
            stabilization: default_stabilization(),
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.tol > 0.0) {
            return Err(SolverError::InvalidProgram("solver tol must be > 0".into()));
        }
        if self.max_iter == 0 {
            return Err(SolverError::InvalidProgram("solver max_iter must be > 0".into()));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(SolverError::InvalidProgram("solver damping must be in (0, 1]".into()));
        }
        if !(self.stabilization >= 0.0 && self.stabilization.is_finite()) {
            return Err(SolverError::InvalidProgram("solver stabilization must be >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub field: LatticeField,
    pub stresses: Vec<StressState>,
    pub iterations: usize,
    pub residual: f64,
}

/// Smallest-to-largest LU pivot ratio treated as numerically singular.
const PIVOT_RATIO: f64 = 1e-8;
/// Singular values below this fraction of the largest are treated as zero.
const SVD_CUTOFF: f64 = 1e-12;

enum Factor {
    Lu(LU<f64, nalgebra::Dyn, nalgebra::Dyn>),
    Svd(SVD<f64, nalgebra::Dyn, nalgebra::Dyn>),
    Empty,
}

impl Factor {
    fn new(j: DMatrix<f64>) -> Self {
        if j.nrows() == 0 {
            return Factor::Empty;
        }
        let lu = j.clone().lu();
        let pivots = lu.u().diagonal().map(f64::abs);
        if lu.is_invertible() && pivots.min() > PIVOT_RATIO * pivots.max() {
            Factor::Lu(lu)
        } else {
            log::debug!("equilibrium Jacobian is singular, using least squares");
            Factor::Svd(j.svd(true, true))
        }
    }

    fn solve(&self, r: &DVector<f64>) -> DVector<f64> {
        match self {
            Factor::Lu(lu) => lu.solve(r).unwrap_or_else(|| DVector::zeros(r.len())),
            Factor::Svd(svd) => {
                let cutoff = SVD_CUTOFF * svd.singular_values.max();
                svd.solve(r, cutoff).unwrap_or_else(|_| DVector::zeros(r.len()))
            }
            Factor::Empty => DVector::zeros(0),
        }
    }

    fn least_squares(&self) -> bool {
        matches!(self, Factor::Svd(_))
    }
}

/// Equilibrium solver for one lattice topology.
///
/// Boundary-shell nodes carry the imposed affine map; so do interior nodes
/// whose stencil is degenerate or that no intact path joins to the boundary. Every other node is unknown, with the
/// divergence of both stress channels as its residual. Each iteration solves
/// the initial elastic stiffness (factored once) against the current residual.
pub struct EquilibriumSolver {
    op: GradientOperator,
    coords: Vec<Vector3<f64>>,
    factor: Vec<f64>,
    index: Vec<Option<usize>>,
    unknowns: Vec<usize>,
    stab: Vec<StabBond>,
    ju: Factor,
    jw: Factor,
    models: Models,
}

/// Intact bond `(i, j)` with weight `κ` and offset `d = x_j − x_i`.
struct StabBond {
    i: usize,
    j: usize,
    kappa: f64,
    d: Vector3<f64>,
}

/// Sum of intact bond stiffness over the nominal coordination.
pub(crate) fn stiffness_factors(lattice: &FsnLattice) -> Vec<f64> {
    let mut sum = vec![0.0; lattice.len()];
    for b in lattice.bonds.iter().filter(|b| b.intact) {
        sum[b.a] += b.stiffness;
        sum[b.b] += b.stiffness;
    }
    (0..lattice.len())
        .map(|i| match lattice.nominal_degree(i) {
            0 => 1.0,
            d => sum[i] / d as f64,
        })
        .collect()
}

/// Nodes joined to some boundary node through intact bonds.
fn anchored(lattice: &FsnLattice) -> Vec<bool> {
    let adj = lattice.adjacency();
    let mut seen: Vec<bool> = (0..lattice.len()).map(|i| lattice.is_boundary(i)).collect();
    let mut stack: Vec<usize> = (0..lattice.len()).filter(|&i| seen[i]).collect();
    while let Some(i) = stack.pop() {
        for &(j, _) in &adj[i] {
            if !seen[j] {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    seen
}

fn tangent(m: &Matrix3<f64>, c: &OntologyConstants, symmetric: bool) -> Matrix3<f64> {
    if symmetric {
        isotropic(&(0.5 * (m + m.transpose())), c)
    } else {
        isotropic(m, c)
    }
}

impl EquilibriumSolver {
    pub fn new(lattice: &FsnLattice, models: &Models) -> Self {
        let op = GradientOperator::new(lattice);
        let anchored = anchored(lattice);
        let mut index = vec![None; lattice.len()];
        let mut unknowns = Vec::new();
        for i in 0..lattice.len() {
            if !lattice.is_boundary(i) && !op.is_degenerate(i) && anchored[i] {
                index[i] = Some(unknowns.len());
                unknowns.push(i);
            }
        }
        let factor = stiffness_factors(lattice);
        let two_g = 2.0 * models.constants.shear_modulus();
        let stab = lattice
            .bonds
            .iter()
            .filter(|b| b.intact && models.solver.stabilization > 0.0)
            .filter(|b| !(op.is_degenerate(b.a) && op.is_degenerate(b.b)))
            .filter_map(|b| {
                let d = Vector3::from(lattice.nodes[b.b].coords) - Vector3::from(lattice.nodes[b.a].coords);
                let l2 = d.norm_squared();
                (l2 > 0.0).then(|| StabBond {
                    i: b.a,
                    j: b.b,
                    kappa: models.solver.stabilization * two_g * b.stiffness / l2,
                    d,
                })
            })
            .collect();
        let mut s = Self {
            stab,
            coords: lattice.nodes.iter().map(|n| Vector3::from(n.coords)).collect(),
            op,
            factor,
            index,
            unknowns,
            ju: Factor::Empty,
            jw: Factor::Empty,
            models: models.clone(),
        };
        s.ju = Factor::new(s.jacobian(true));
        s.jw = Factor::new(s.jacobian(false));
        s
    }

    pub fn unknown_count(&self) -> usize {
        self.unknowns.len()
    }

    pub fn operator(&self) -> &GradientOperator {
        &self.op
    }

    /// `(j, coefficient)` pairs such that `Σ_j f_j ⊗ coeff = Σ (f_j − f_i) ⊗ a_j`.
    fn weights(&self, i: usize) -> Vec<(usize, Vector3<f64>)> {
        let s = self.op.stencil(i);
        if s.degenerate {
            return Vec::new();
        }
        let mut w: Vec<(usize, Vector3<f64>)> = s.neighbors.iter().copied().zip(s.coeffs.iter().copied()).collect();
        let sum: Vector3<f64> = s.coeffs.iter().sum();
        w.push((i, -sum));
        w
    }

    /// Elastic tangent of the interior residual for the phonon (`symmetric`) or phason channel.
    pub fn jacobian(&self, symmetric: bool) -> DMatrix<f64> {
        let n = 3 * self.unknowns.len();
        let c = &self.models.constants;
        let mut j = DMatrix::zeros(n, n);
        for (row, &i) in self.unknowns.iter().enumerate() {
            for (node_j, beta) in self.weights(i) {
                let fj = self.factor[node_j];
                for (node_k, gamma) in self.weights(node_j) {
                    let Some(col) = self.index[node_k] else { continue };
                    for s in 0..3 {
                        let mut e = Matrix3::zeros();
                        e.set_row(s, &gamma.transpose());
                        let t = fj * tangent(&e, c, symmetric) * beta;
                        for r in 0..3 {
                            j[(3 * row + r, 3 * col + s)] += t[r];
                        }
                    }
                }
            }
        }
        for b in &self.stab {
            for (node, coeff) in self.bond_terms(b) {
                let Some(col) = self.index[node] else { continue };
                // R_i −= κ r_ij and R_j += κ r_ij
                for (end, sign) in [(b.i, -1.0), (b.j, 1.0)] {
                    if let Some(row) = self.index[end] {
                        for r in 0..3 {
                            j[(3 * row + r, 3 * col + r)] += sign * b.kappa * coeff;
                        }
                    }
                }
            }
        }
        j
    }

    /// `r_ij = Σ_k coeff_k v_k` for the bond residual of a vector field `v`.
    fn bond_terms(&self, b: &StabBond) -> Vec<(usize, f64)> {
        let mut terms = vec![(b.j, 1.0), (b.i, -1.0)];
        let ends: Vec<usize> = [b.i, b.j].into_iter().filter(|&e| !self.op.is_degenerate(e)).collect();
        let share = 1.0 / ends.len() as f64;
        for e in ends {
            for (k, gamma) in self.weights(e) {
                terms.push((k, -share * gamma.dot(&b.d)));
            }
        }
        terms
    }

    fn stabilize(&self, values: &[Vector3<f64>], out: &mut [Vector3<f64>]) {
        for b in &self.stab {
            let r: Vector3<f64> = self.bond_terms(b).iter().map(|&(k, c)| c * values[k]).sum();
            out[b.i] -= b.kappa * r;
            out[b.j] += b.kappa * r;
        }
    }

    pub(crate) fn strains(&self, field: &LatticeField) -> Vec<StrainState> {
        strains_with(&self.op, field)
    }

    pub(crate) fn stresses(&self, field: &LatticeField, eigen: Option<&[StrainState]>) -> Result<Vec<StressState>, SolverError> {
        let strains = strains_with(&self.op, field);
        strains
            .iter()
            .enumerate()
            .map(|(i, e)| {
                if self.op.is_degenerate(i) {
                    return Ok(StressState::zero());
                }
                let e = match eigen {
                    Some(p) => e.sub(&p[i]),
                    None => *e,
                };
                Ok(scaled(node_stress(&e, &self.models.constants, self.models.law)?, self.factor[i]))
            })
            .collect()
    }

    fn residual(&self, field: &LatticeField, stresses: &[StressState]) -> (DVector<f64>, DVector<f64>, f64) {
        let r = residual_with(&self.op, stresses);
        let mut su = vec![Vector3::zeros(); field.len()];
        let mut sw = vec![Vector3::zeros(); field.len()];
        self.stabilize(&field.u, &mut su);
        self.stabilize(&field.w, &mut sw);
        let n = self.unknowns.len();
        let mut ru = DVector::zeros(3 * n);
        let mut rw = DVector::zeros(3 * n);
        let mut norm: f64 = 0.0;
        for (row, &i) in self.unknowns.iter().enumerate() {
            let (a, b) = (r[i].0 + su[i], r[i].1 + sw[i]);
            ru.fixed_rows_mut::<3>(3 * row).copy_from(&a);
            rw.fixed_rows_mut::<3>(3 * row).copy_from(&b);
            norm = norm.max((a.norm_squared() + b.norm_squared()).sqrt());
        }
        (ru, rw, norm)
    }

    /// Solves with `boundary` on fixed nodes, starting from `initial` on the
    /// unknowns. `eigen` is a per-node plastic strain subtracted before the
    /// constitutive law.
    pub fn solve(
        &self,
        boundary: &Boundary,
        initial: Option<&LatticeField>,
        eigen: Option<&[StrainState]>,
    ) -> Result<SolveReport, SolverError> {
        let n = self.coords.len();
        let opts = self.models.solver;
        let mut field = LatticeField {
            u: self.coords.iter().map(|x| boundary.phonon * x).collect(),
            w: self.coords.iter().map(|x| boundary.phason * x).collect(),
        };
        if let Some(init) = initial {
            if init.len() != n {
                return Err(SolverError::SizeMismatch { expected: n, got: init.len() });
            }
            for &i in &self.unknowns {
                field.u[i] = init.u[i];
                field.w[i] = init.w[i];
            }
        }
        if let Some(p) = eigen {
            if p.len() != n {
                return Err(SolverError::SizeMismatch { expected: n, got: p.len() });
            }
        }
        let mut stresses = self.stresses(&field, eigen)?;
        let (mut ru, mut rw, mut norm) = self.residual(&field, &stresses);
        let mut best = (norm, field.clone());
        let mut iterations = 0;
        while norm >= opts.tol {
            if iterations == opts.max_iter {
                return Err(SolverError::NonConvergence {
                    iterations,
                    residual: best.0,
                    best: Box::new(best.1),
                });
            }
            iterations += 1;
            let du = self.ju.solve(&ru);
            let dw = self.jw.solve(&rw);
            for (row, &i) in self.unknowns.iter().enumerate() {
                field.u[i] -= opts.damping * du.fixed_rows::<3>(3 * row);
                field.w[i] -= opts.damping * dw.fixed_rows::<3>(3 * row);
            }
            stresses = self.stresses(&field, eigen)?;
            (ru, rw, norm) = self.residual(&field, &stresses);
            // A rank-deficient system may have no exact solution; stop at the
            // least-squares fixed point.
            let step = opts.damping * du.amax().max(dw.amax());
            if norm.is_finite() && step < opts.tol && (self.ju.least_squares() || self.jw.least_squares()) {
                log::debug!("least-squares equilibrium, residual {norm:e}");
                break;
            }
            if !norm.is_finite() {
                return Err(SolverError::NonConvergence {
                    iterations,
                    residual: best.0,
                    best: Box::new(best.1),
                });
            }
            if norm < best.0 {
                best = (norm, field.clone());
            }
        }
        Ok(SolveReport {
            field,
            stresses,
            iterations,
            residual: norm,
        })
    }
}

/// One-shot equilibrium solve with no plastic strain.
pub fn solve_equilibrium(lattice: &FsnLattice, boundary: &Boundary, models: &Models) -> Result<SolveReport, SolverError> {
    models.validate()?;
    EquilibriumSolver::new(lattice, models).solve(boundary, None, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constitutive::{FlowModel, ModulusMode, YieldModel};
    use crate::lattice::{build_bethe, BetheLatticeSpec};
    use crate::solver::Law;

    pub(crate) fn models(law: Law) -> Models {
        Models {
            constants: OntologyConstants {
                s_0: 1.0,
                a: 1.0,
                n: 3.0,
                e_el: 3.0,
                bulk: 2.0,
                phason_coupling: 0.5,
                enforce_continuity: true,
            },
            yield_model: YieldModel::perfect(1.0),
            flow: FlowModel { modulus_mode: ModulusMode::Constant, k0: 1.0 },
            creep: None,
            law,
            solver: SolveOptions::default(),
        }
    }

    fn lattice() -> FsnLattice {
        build_bethe(&BetheLatticeSpec::new(3, 5, 3)).unwrap()
    }

    fn boundary() -> Boundary {
        Boundary {
            phonon: Matrix3::new(0.01, 0.002, 0.0, -0.003, 0.0, 0.001, 0.0, 0.004, -0.005),
            phason: Matrix3::new(0.0, 0.001, 0.0, 0.0, 0.002, 0.0, 0.003, 0.0, 0.0),
        }
    }

    #[test]
    fn zero_boundary_gives_zero_field() {
        let l = lattice();
        let r = solve_equilibrium(&l, &Boundary::zero(), &models(Law::Elastic)).unwrap();
        assert_eq!(r.iterations, 0);
        assert!(r.field.u.iter().chain(&r.field.w).all(|v| v.norm() == 0.0));
    }

    #[test]
    fn patch_test_from_perturbed_start() {
        let l = lattice();
        let b = boundary();
        let solver = EquilibriumSolver::new(&l, &models(Law::Elastic));
        let mut init = LatticeField::zeros(l.len());
        for (i, v) in init.u.iter_mut().enumerate() {
            *v = Vector3::new(0.01 * (i % 7) as f64, 0.0, -0.02);
        }
        let r = solver.solve(&b, Some(&init), None).unwrap();
        for (i, n) in l.nodes.iter().enumerate() {
            let x = Vector3::from(n.coords);
            assert!((r.field.u[i] - b.phonon * x).amax() < 1e-10);
            assert!((r.field.w[i] - b.phason * x).amax() < 1e-10);
        }
    }

    #[test]
    fn softened_bond_perturbation_is_local() {
        let l = lattice();
        let mut soft = l.clone();
        soft.bonds[20].stiffness *= 0.5;
        let m = models(Law::Elastic);
        let b = boundary();
        let base = solve_equilibrium(&l, &b, &m).unwrap();
        let pert = solve_equilibrium(&soft, &b, &m).unwrap();
        let diff: Vec<f64> = (0..l.len()).map(|i| (pert.field.u[i] - base.field.u[i]).norm()).collect();
        let (x, y) = (soft.bonds[20].a, soft.bonds[20].b);
        let near = diff[x].max(diff[y]);
        assert!(near > 1e-8);
        let d = crate::lattice::FsnLattice::generation_distance;
        let far = (0..l.len())
            .filter(|&i| d(&l, i, x, crate::lattice::DistanceKind::Generation).unwrap() >= 3.0 && !l.is_boundary(i))
            .map(|i| diff[i])
            .fold(0.0, f64::max);
        assert!(far < near, "far {far} near {near}");
    }

    #[test]
    fn total_deformation_converges_beyond_proportional_limit() {
        let l = lattice();
        let b = Boundary { phonon: boundary().phonon * 60.0, phason: Matrix3::zeros() };
        let m = models(Law::TotalDeformation);
        let r = solve_equilibrium(&l, &b, &m).unwrap();
        assert!(r.residual < m.solver.tol);
        // homogeneous secant law also passes the patch test
        for (i, n) in l.nodes.iter().enumerate() {
            assert!((r.field.u[i] - b.phonon * Vector3::from(n.coords)).amax() < 1e-8);
        }
    }

    #[test]
    fn non_convergence_carries_best_field() {
        let l = lattice();
        let mut m = models(Law::TotalDeformation);
        m.solver.max_iter = 1;
        m.solver.tol = 1e-300;
        let b = Boundary { phonon: boundary().phonon * 60.0, phason: Matrix3::zeros() };
        let mut init = LatticeField::zeros(l.len());
        init.u[1] = Vector3::new(0.3, 0.0, 0.0);
        match EquilibriumSolver::new(&l, &m).solve(&b, Some(&init), None) {
            Err(SolverError::NonConvergence { iterations, best, .. }) => {
                assert_eq!(iterations, 1);
                assert_eq!(best.len(), l.len());
            }
            other => panic!("{other:?}"),
        }
    }
}
