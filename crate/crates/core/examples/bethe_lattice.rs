//! Build Bethe lattices, compare shell populations with the closed form and
//! round-trip a lattice through JSON.

use fsn::lattice::{build_bethe, from_json, shell_count, to_json, total_nodes, BetheLatticeSpec, DistanceKind};

fn main() {
    for z in 2..=5 {
        let l = build_bethe(&BetheLatticeSpec::new(z, 4, 1)).unwrap();
        let shells: Vec<usize> = (0..=4).map(|k| l.shell_population(k)).collect();
        let closed: Vec<u64> = (1..=4).map(|k| shell_count(z, k).unwrap()).collect();
        println!("z={z}: shells {shells:?}, N_k {closed:?}, total {}", total_nodes(z, 4));
    }

    let l = build_bethe(&BetheLatticeSpec::new(3, 3, 7)).unwrap();
    let leaf = l.len() - 1;
    for kind in [DistanceKind::SqrtGeneration, DistanceKind::Generation] {
        println!("{kind:?} distance root..leaf = {}", l.generation_distance(0, leaf, kind).unwrap());
    }
    let [x, y, z] = l.nodes[leaf].coords;
    println!("leaf {leaf} sits at ({x:.3}, {y:.3}, {z:.3})");

    let text = to_json(&l);
    let back = from_json(&text).unwrap();
    println!("json {} bytes, round trip equal: {}", text.len(), back == l);
}
