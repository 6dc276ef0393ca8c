//! Score tag pairs by the overlap of their resources' closed intents.

use fsn::ingest::{build_fd_tags, compute_exposition, parse_events, tag_pairs, ContextRoles, FormalContext};
use fsn::lattice::{embed, ontology_match};

const EVENTS: &str = r#"{"tag":"semantic web","uri":"http://x.org/one","ts":1,"imp":9,"clk":3}
{"tag":"semantic graph","uri":"http://x.org/two","ts":2,"imp":9,"clk":1}
{"tag":"music","uri":"http://x.org/three","ts":3,"imp":4,"clk":4}
"#;

fn main() {
    let events = parse_events(EVENTS.as_bytes()).unwrap().events;
    let ctx = FormalContext::from_events(&events, ContextRoles::ResourcesAsObjects);
    let tags = build_fd_tags(&ctx, &tag_pairs(&events), &compute_exposition(&events), embed).unwrap();
    for a in &tags {
        for b in &tags {
            if a.id <= b.id {
                let s = ontology_match(a, b, &ctx).unwrap();
                println!("{:>15} ~ {:<15} {s:.6}", a.label, b.label);
            }
        }
    }
}
