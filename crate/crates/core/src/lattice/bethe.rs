use std::f64::consts::PI;

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{BetheLatticeSpec, Bond, FsnLattice, LatticeError, Node};

pub const DEFAULT_NODE_BOUND: usize = 1_000_000;

/// Opening half-angle of the cone the origin's neighbors sit on.
const ROOT_CONE: f64 = 70.0 * PI / 180.0;
/// Opening half-angle of the cone children sit on around the incoming bond.
const CHILD_CONE: f64 = 55.0 * PI / 180.0;

/// Population of shell `k`: `z (z - 1)^(k - 1)`.
pub fn shell_count(z: usize, k: usize) -> Result<u64, LatticeError> {
    if z < 2 {
        return Err(LatticeError::Domain(format!("z must be >= 2, got {z}")));
    }
    if k == 0 {
        return Err(LatticeError::Domain("shell index k must be >= 1".into()));
    }
    let pow = u32::try_from(k - 1)
        .ok()
        .and_then(|e| (z as u64 - 1).checked_pow(e))
        .and_then(|p| p.checked_mul(z as u64));
    pow.ok_or_else(|| LatticeError::Domain(format!("shell count overflows for z={z}, k={k}")))
}

/// `1 + Σ_{k=1..k_max} N_k`, saturating at `u128::MAX`.
pub fn total_nodes(z: usize, k_max: usize) -> u128 {
    let mut total: u128 = 1;
    let mut shell: u128 = z as u128;
    for _ in 1..=k_max {
        total = total.saturating_add(shell);
        shell = shell.saturating_mul(z as u128 - 1);
        if total == u128::MAX {
            break;
        }
    }
    total
}

pub fn build_bethe(spec: &BetheLatticeSpec) -> Result<FsnLattice, LatticeError> {
    build_bethe_bounded(spec, DEFAULT_NODE_BOUND)
}

/// Grows the lattice generation by generation: the origin bonds to `z`
/// neighbors, every later node to `z - 1` children. Node ids follow BFS order
/// and bond `i` joins node `i + 1` to its parent.
///
/// Nodes get unit-length bond geometry: children sit on a cone around their
/// incoming bond direction at seeded azimuths, so every interior node sees
/// non-coplanar neighbor offsets when `z >= 3`.
pub fn build_bethe_bounded(spec: &BetheLatticeSpec, bound: usize) -> Result<FsnLattice, LatticeError> {
    spec.validate()?;
    let projected = total_nodes(spec.z, spec.k_max);
    if projected > bound as u128 {
        return Err(LatticeError::TooLarge { projected, bound });
    }
    let n = projected as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut nodes = Vec::with_capacity(n);
    let mut bonds = Vec::with_capacity(n.saturating_sub(1));
    // incoming unit direction per node
    let mut heading: Vec<Vector3<f64>> = Vec::with_capacity(n);

    nodes.push(Node {
        id: 0,
        generation: 0,
        tag: None,
        coords: [0.0; 3],
    });
    heading.push(random_unit(&mut rng));

    let mut frontier = vec![0usize];
    for gen in 1..=spec.k_max {
        let mut next = Vec::with_capacity(frontier.len() * (spec.z - 1).max(1));
        for &parent in &frontier {
            let (count, cone, slots) = if gen == 1 {
                (spec.z, ROOT_CONE, spec.z)
            } else {
                (spec.z - 1, CHILD_CONE, spec.z)
            };
            let axis = heading[parent];
            let (e1, e2) = orthonormal_pair(&axis);
            let phase = rng.random::<f64>() * 2.0 * PI;
            let origin = Vector3::from(nodes[parent].coords);
            for j in 0..count {
                let phi = phase + 2.0 * PI * j as f64 / slots as f64;
                let dir = (axis * cone.cos() + (e1 * phi.cos() + e2 * phi.sin()) * cone.sin()).normalize();
                let id = nodes.len();
                nodes.push(Node {
                    id,
                    generation: gen,
                    tag: None,
                    coords: (origin + dir).into(),
                });
                heading.push(dir);
                bonds.push(Bond {
                    a: parent,
                    b: id,
                    stiffness: 1.0,
                    intact: true,
                });
                next.push(id);
            }
        }
        frontier = next;
    }
    debug_assert_eq!(nodes.len(), n);
    Ok(FsnLattice {
        spec: *spec,
        nodes,
        bonds,
    })
}

fn random_unit(rng: &mut ChaCha8Rng) -> Vector3<f64> {
    let cos_t: f64 = rng.random_range(-1.0..1.0);
    let phi: f64 = rng.random::<f64>() * 2.0 * PI;
    let sin_t = (1.0 - cos_t * cos_t).sqrt();
    Vector3::new(sin_t * phi.cos(), sin_t * phi.sin(), cos_t)
}

fn orthonormal_pair(axis: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let helper = if axis.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
    let e1 = axis.cross(&helper).normalize();
    let e2 = axis.cross(&e1);
    (e1, e2)
}
