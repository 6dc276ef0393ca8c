//! Parse folksonomy events, compute click-through exposition and build FD tags.

use fsn::ingest::{
    build_fd_tags, compute_exposition, parse_events, tag_pairs, ContextRoles, FormalContext,
};
use fsn::lattice::embed;

const EVENTS: &str = r#"{"tag":"Rust language","uri":"http://a.org/rust","ts":1,"imp":40,"clk":12}
{"tag":"systems","uri":"http://a.org/rust","ts":2,"imp":10,"clk":1}
{"tag":"Bethe lattice","uri":"http://b.org/bethe","ts":3,"imp":25,"clk":5}
{"tag":"lattice","uri":"http://b.org/bethe","ts":4,"imp":5,"clk":0}
not an event
{"tag":"systems","uri":"http://b.org/bethe","ts":5,"imp":8,"clk":2}
"#;

fn main() {
    let report = parse_events(EVENTS.as_bytes()).expect("in-memory read");
    println!("parsed {} events, skipped {}", report.events.len(), report.skipped());
    for e in &report.errors {
        println!("  line {}: {}", e.line, e.message);
    }

    let exposition = compute_exposition(&report.events);
    for (key, e) in &exposition.values {
        println!("E({}, {}) = {e:.3}", key.tag, key.uri);
    }

    let context = FormalContext::from_events(&report.events, ContextRoles::ResourcesAsObjects);
    println!("objects {:?}", context.objects());
    println!("attributes {:?}", context.attributes());

    let tags = build_fd_tags(&context, &tag_pairs(&report.events), &exposition, embed).unwrap();
    for t in &tags {
        let [c, e, r] = t.embedding;
        println!("#{} {:<14} E={:.3} -> ({c:.3}, {e:.3}, {r:.3})", t.id, t.label, t.exposition);
    }
}
