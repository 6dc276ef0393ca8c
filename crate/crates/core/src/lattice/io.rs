use serde::{Deserialize, Serialize};

use super::{BetheLatticeSpec, Bond, FsnLattice, LatticeError, Node};

#[derive(Serialize, Deserialize)]
struct LatticeJson {
    spec: BetheLatticeSpec,
    nodes: Vec<NodeJson>,
    bonds: Vec<BondJson>,
}

#[derive(Serialize, Deserialize)]
struct NodeJson {
    id: usize,
    gen: usize,
    tag: Option<usize>,
    xyz: [f64; 3],
}

#[derive(Serialize, Deserialize)]
struct BondJson {
    a: usize,
    b: usize,
    stiffness: f64,
    intact: bool,
}

pub fn to_json(lattice: &FsnLattice) -> String {
    let doc = LatticeJson {
        spec: lattice.spec,
        nodes: lattice
            .nodes
            .iter()
            .map(|n| NodeJson {
                id: n.id,
                gen: n.generation,
                tag: n.tag,
                xyz: n.coords,
            })
            .collect(),
        bonds: lattice
            .bonds
            .iter()
            .map(|b| BondJson {
                a: b.a,
                b: b.b,
                stiffness: b.stiffness,
                intact: b.intact,
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("lattice serializes")
}

pub fn from_json(text: &str) -> Result<FsnLattice, LatticeError> {
    let doc: LatticeJson = serde_json::from_str(text)?;
    doc.spec.validate()?;
    let mut nodes = Vec::with_capacity(doc.nodes.len());
    for (i, n) in doc.nodes.into_iter().enumerate() {
        if n.id != i {
            return Err(LatticeError::Malformed(format!("node at position {i} has id {}", n.id)));
        }
        if n.xyz.iter().any(|v| !v.is_finite()) {
            return Err(LatticeError::Malformed(format!("node {i} has non-finite coordinates")));
        }
        nodes.push(Node {
            id: n.id,
            generation: n.gen,
            tag: n.tag,
            coords: n.xyz,
        });
    }
    let mut bonds = Vec::with_capacity(doc.bonds.len());
    for (i, b) in doc.bonds.into_iter().enumerate() {
        if b.a >= nodes.len() || b.b >= nodes.len() || b.a == b.b {
            return Err(LatticeError::Malformed(format!("bond {i} has invalid endpoints ({}, {})", b.a, b.b)));
        }
        if !(b.stiffness > 0.0 && b.stiffness.is_finite()) {
            return Err(LatticeError::Malformed(format!("bond {i} stiffness must be positive")));
        }
        bonds.push(Bond {
            a: b.a,
            b: b.b,
            stiffness: b.stiffness,
            intact: b.intact,
        });
    }
    Ok(FsnLattice {
        spec: doc.spec,
        nodes,
        bonds,
    })
}
