//! Enumerate the formal concepts of a small context and check them against
//! brute-force closure.

use fsn::ingest::{brute_force_concepts, enumerate_concepts, FormalContext};

fn main() {
    let objects = ["r1", "r2", "r3", "r4"].map(String::from).to_vec();
    let attributes = ["web", "rdf", "tagging", "graph"].map(String::from).to_vec();
    let incidence = [[0, 0], [0, 1], [1, 0], [1, 2], [2, 1], [2, 3], [3, 0], [3, 1], [3, 3]];
    let ctx = FormalContext::new(objects, attributes, &incidence).unwrap();

    let concepts = enumerate_concepts(&ctx).unwrap();
    for c in &concepts {
        println!("{:?} x {:?}", c.extent_names(&ctx), c.intent_names(&ctx));
    }

    let mut a = concepts.clone();
    let mut b = brute_force_concepts(&ctx);
    a.sort_by(|x, y| x.extent.cmp(&y.extent));
    b.sort_by(|x, y| x.extent.cmp(&y.extent));
    println!("{} concepts, brute force agrees: {}", a.len(), a == b);

    let closed = ctx.derive(fsn::ingest::Side::Attributes, &["rdf"]).unwrap();
    println!("objects tagged rdf: {closed:?}");
}
