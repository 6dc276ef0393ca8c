//! The command surface end to end: ingest, build, simulate, match and export
//! into a temporary directory.

use fsn::cli::run;

const EVENTS: &str = r#"{"tag":"semantic web","uri":"http://x.org/one","ts":1,"imp":9,"clk":3}
{"tag":"semantic graph","uri":"http://x.org/two","ts":2,"imp":9,"clk":1}
{"tag":"web","uri":"http://x.org/one","ts":3,"imp":4,"clk":4}
"#;

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name).to_string_lossy().into_owned();
    std::fs::write(p("events.jsonl"), EVENTS).unwrap();
    std::fs::write(p("run.toml"), "[ingest]\nevents = \"events.jsonl\"\n[load]\nsteps = 50\n").unwrap();
    std::fs::write(p("pairs.csv"), "0,1\n0,2\n").unwrap();

    let config = p("run.toml");
    let out = p("out");
    let steps: [&[&str]; 5] = [
        &["ingest", &p("events.jsonl")],
        &["build"],
        &["simulate"],
        &["match", &format!("{out}/fd_tags.json"), &p("pairs.csv")],
        &["export", "--lattice", &format!("{out}/lattice.json"), "--context", &format!("{out}/context.json")],
    ];
    for args in steps {
        let mut argv = vec!["fsn", "--config", &config, "--out", &out];
        argv.extend_from_slice(args);
        println!("$ fsn {}  -> exit {}", args[0], run(argv));
    }
    print!("{}", std::fs::read_to_string(format!("{out}/match.csv")).unwrap());
}
