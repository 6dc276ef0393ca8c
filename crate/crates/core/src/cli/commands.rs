use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::{BufReader, Write as _};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use clap::{Parser, Subcommand};
use serde::Serialize;

use super::{CliError, RunConfig, RunManifest};
use crate::ingest::{
    build_fd_tags, compute_exposition, enumerate_concepts, parse_events, tag_pairs, ContextRoles, FdTag,
    FormalContext, ParseReport,
};
use crate::lattice::{build_bethe_bounded, embed, from_json, ontology_match, to_json, FsnLattice, LatticeError};
use crate::solver::{
    curve_csv, ductility_onset, events_jsonl, homologous_exposition, run_loading, RunOutcome, RunStatus,
};

#[derive(Debug, Parser)]
#[command(name = "fsn", version, about = "Folksonomy tag lattices under quasi-static loading")]
pub struct Cli {
    /// TOML run configuration; built-in calibrated defaults when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides `output.dir`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Overrides the lattice and load seeds.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Suppress summary lines and warnings.
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tag events (JSONL) to context.json and fd_tags.json.
    Ingest { events: PathBuf },
    /// Build the configured lattice into lattice.json.
    Build,
    /// Run the load program: curve.csv, events.jsonl, manifest.json.
    Simulate {
        /// Use this lattice instead of building one.
        #[arg(long)]
        lattice: Option<PathBuf>,
        /// Overrides `load.strain_rate`.
        #[arg(long)]
        rate: Option<f64>,
    },
    /// Simulate every (rate, seed) of the sweep section in parallel.
    Sweep,
    /// Score tag pairs: match.csv with `tag_a,tag_b,score`.
    Match {
        /// fd_tags.json from `ingest`.
        tags: PathBuf,
        /// Lines of `id_a,id_b`.
        pairs: PathBuf,
        /// Formal context; defaults to context.json next to the tags file.
        #[arg(long)]
        context: Option<PathBuf>,
    },
    /// Plot-ready tables: nodes.csv and bonds.csv from a lattice, concepts.json from a context.
    Export {
        #[arg(long)]
        lattice: Option<PathBuf>,
        #[arg(long)]
        context: Option<PathBuf>,
    },
    /// Print the resolved configuration as TOML.
    Config {
        #[arg(long)]
        print_defaults: bool,
    },
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let level = if cli.quiet { log::LevelFilter::Error } else { log::LevelFilter::Warn };
    let _ = env_logger::Builder::new().filter_level(level).try_init();
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

struct Ctx {
    cfg: RunConfig,
    out: PathBuf,
    quiet: bool,
}

impl Ctx {
    fn say(&self, line: &str) {
        if !self.quiet {
            println!("{line}");
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.set_seed(seed);
    }
    let out = cli.out.clone().unwrap_or_else(|| cfg.output.dir.clone());
    let ctx = Ctx { cfg, out, quiet: cli.quiet };
    match &cli.command {
        Command::Ingest { events } => cmd_ingest(&ctx, events),
        Command::Build => cmd_build(&ctx),
        Command::Simulate { lattice, rate } => cmd_simulate(ctx, lattice.as_deref(), *rate),
        Command::Sweep => cmd_sweep(&ctx),
        Command::Match { tags, pairs, context } => cmd_match(&ctx, tags, pairs, context.as_deref()),
        Command::Export { lattice, context } => cmd_export(&ctx, lattice.as_deref(), context.as_deref()),
        Command::Config { print_defaults } => {
            let c = if *print_defaults { RunConfig::default() } else { ctx.cfg.clone() };
            print!("{}", c.to_toml());
            Ok(())
        }
    }
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

fn json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("value serializes");
    s.push('\n');
    s.into_bytes()
}

fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn validation(e: impl std::fmt::Display) -> CliError {
    CliError::Validation(e.to_string())
}

struct Ingested {
    report: ParseReport,
    context: FormalContext,
    tags: Vec<FdTag>,
}

fn ingest_file(path: &Path, roles: ContextRoles) -> Result<Ingested, CliError> {
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    let report = parse_events(BufReader::new(file)).map_err(|e| match e {
        crate::ingest::IngestError::Io(io) => CliError::io(path, io),
        other => validation(other),
    })?;
    let context = FormalContext::from_events(&report.events, roles);
    let exposition = compute_exposition(&report.events);
    let pairs = tag_pairs(&report.events);
    let resources = if roles == ContextRoles::ResourcesAsObjects { context.clone() } else { context.transposed() };
    let tags = build_fd_tags(&resources, &pairs, &exposition, embed).map_err(validation)?;
    Ok(Ingested { report, context, tags })
}

fn cmd_ingest(ctx: &Ctx, events: &Path) -> Result<(), CliError> {
    let ing = ingest_file(events, ctx.cfg.ingest.roles)?;
    write_atomic(&ctx.path("context.json"), &json(&ing.context))?;
    write_atomic(&ctx.path("fd_tags.json"), &json(&ing.tags))?;
    ctx.say(&format!(
        "objects={} attributes={} tags={} skipped={}",
        ing.context.objects().len(),
        ing.context.attributes().len(),
        ing.tags.len(),
        ing.report.skipped()
    ));
    Ok(())
}

fn build_lattice(cfg: &RunConfig) -> Result<(FsnLattice, Option<Vec<FdTag>>), CliError> {
    let lattice = build_bethe_bounded(&cfg.lattice_spec(), cfg.lattice.node_bound).map_err(validation)?;
    match &cfg.ingest.events {
        None => Ok((lattice, None)),
        Some(p) => {
            let ing = ingest_file(p, cfg.ingest.roles)?;
            let placed = lattice.assign_tags(&ing.tags, cfg.lattice.assign).map_err(validation)?;
            Ok((placed, Some(ing.tags)))
        }
    }
}

fn cmd_build(ctx: &Ctx) -> Result<(), CliError> {
    ctx.cfg.validate()?;
    let (lattice, _) = build_lattice(&ctx.cfg)?;
    write_atomic(&ctx.path("lattice.json"), to_json(&lattice).as_bytes())?;
    ctx.say(&format!("nodes={} bonds={}", lattice.len(), lattice.bonds.len()));
    Ok(())
}

fn load_lattice(path: &Path) -> Result<FsnLattice, CliError> {
    from_json(&read_text(path)?).map_err(|e: LatticeError| validation(format!("{}: {e}", path.display())))
}

fn onset_text(outcome: &RunOutcome) -> String {
    match ductility_onset(&outcome.samples) {
        Ok(v) if v.is_finite() => format!("{v:.2}"),
        Ok(_) => "inf".into(),
        Err(_) => "n/a".into(),
    }
}

fn cmd_simulate(mut ctx: Ctx, lattice: Option<&Path>, rate: Option<f64>) -> Result<(), CliError> {
    if let Some(r) = rate {
        ctx.cfg.load.strain_rate = r;
    }
    ctx.cfg.validate()?;
    let mut manifest = RunManifest::start("simulate", ctx.cfg.hash());
    if let Some(p) = &ctx.cfg.ingest.events {
        manifest.input(p)?;
    }
    let (lat, tags) = match lattice {
        Some(p) => {
            manifest.input(p)?;
            (load_lattice(p)?, None)
        }
        None => build_lattice(&ctx.cfg)?,
    };
    manifest.stage("lattice", "ok", Some(format!("nodes={} bonds={}", lat.len(), lat.bonds.len())));
    let outcome = run_loading(&lat, &ctx.cfg.load, &ctx.cfg.models()).map_err(validation)?;
    write_atomic(&ctx.path("curve.csv"), curve_csv(&outcome.samples).as_bytes())?;
    write_atomic(&ctx.path("events.jsonl"), events_jsonl(&outcome.log).as_bytes())?;
    let onset = onset_text(&outcome);
    let mut summary = format!(
        "samples={} broken={} new={} onset={}",
        outcome.samples.len(),
        outcome.samples.last().map_or(0, |s| s.broken_bonds),
        outcome.samples.last().map_or(0, |s| s.new_bonds),
        onset
    );
    if let (Some(tags), Ok(on)) = (&tags, ductility_onset(&outcome.samples)) {
        let by_id = |node: usize| outcome.lattice.nodes[node].tag.and_then(|t| tags.get(t)).map(|t| t.exposition);
        if let Some(e) = homologous_exposition(&outcome, on, by_id) {
            let _ = write!(summary, " exposition_at_onset={e:.4}");
            manifest.stage("diagnostics", "ok", Some(format!("mean exposition of yielded tags at onset {e}")));
        }
    }
    let result = match &outcome.status {
        RunStatus::Completed => {
            manifest.stage("simulate", "ok", Some(summary.clone()));
            Ok(())
        }
        RunStatus::Halted { step, error } => {
            manifest.stage("simulate", "failed", Some(format!("step {step}: {error}")));
            Err(CliError::Solver(format!("halted at step {step}: {error}")))
        }
    };
    write_atomic(&ctx.path("manifest.json"), manifest.finish().to_json().as_bytes())?;
    ctx.say(&summary);
    result
}

fn cmd_sweep(ctx: &Ctx) -> Result<(), CliError> {
    ctx.cfg.validate()?;
    let mut manifest = RunManifest::start("sweep", ctx.cfg.hash());
    if let Some(p) = &ctx.cfg.ingest.events {
        manifest.input(p)?;
    }
    let jobs: Vec<(f64, u64)> = ctx
        .cfg
        .sweep
        .rates
        .iter()
        .flat_map(|&r| ctx.cfg.sweep.seeds.iter().map(move |&s| (r, s)))
        .collect();
    let workers = match ctx.cfg.sweep.workers {
        0 => std::thread::available_parallelism().map_or(1, |n| n.get()),
        w => w,
    }
    .min(jobs.len().max(1));
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<(String, bool), CliError>>>> =
        Mutex::new((0..jobs.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(&(rate, seed)) = jobs.get(i) else { break };
                let r = sweep_job(ctx, rate, seed);
                results.lock().expect("no worker panicked")[i] = Some(r);
            });
        }
    });
    let mut table = String::from("rate,seed,onset_percent,broken,new,status\n");
    let mut halted = 0;
    for r in results.into_inner().expect("no worker panicked") {
        let (row, ok) = r.expect("every job ran")?;
        table.push_str(&row);
        halted += usize::from(!ok);
    }
    write_atomic(&ctx.path("sweep.csv"), table.as_bytes())?;
    manifest.stage("sweep", if halted == 0 { "ok" } else { "failed" }, Some(format!("runs={} halted={halted}", jobs.len())));
    write_atomic(&ctx.path("manifest.json"), manifest.finish().to_json().as_bytes())?;
    ctx.say(&format!("runs={} halted={halted}", jobs.len()));
    if halted > 0 {
        return Err(CliError::Solver(format!("{halted} sweep run(s) halted")));
    }
    Ok(())
}

fn sweep_job(ctx: &Ctx, rate: f64, seed: u64) -> Result<(String, bool), CliError> {
    let mut cfg = ctx.cfg.clone();
    cfg.load.strain_rate = rate;
    cfg.set_seed(seed);
    let (lat, _) = build_lattice(&cfg)?;
    let outcome = run_loading(&lat, &cfg.load, &cfg.models()).map_err(validation)?;
    let dir = ctx.out.join("sweep").join(format!("rate-{rate:e}-seed-{seed}"));
    write_atomic(&dir.join("curve.csv"), curve_csv(&outcome.samples).as_bytes())?;
    write_atomic(&dir.join("events.jsonl"), events_jsonl(&outcome.log).as_bytes())?;
    let last = outcome.samples.last().copied();
    let status = if outcome.completed() { "ok" } else { "halted" };
    Ok((
        format!(
            "{rate:e},{seed},{},{},{},{status}\n",
            onset_text(&outcome),
            last.map_or(0, |s| s.broken_bonds),
            last.map_or(0, |s| s.new_bonds)
        ),
        outcome.completed(),
    ))
}

fn parse_pairs(text: &str) -> Result<Vec<(usize, usize)>, CliError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with("tag_a"))
        .map(|(n, l)| {
            let mut it = l.split(',').map(str::trim);
            let bad = || CliError::Validation(format!("pairs line {}: expected `id_a,id_b`", n + 1));
            let a = it.next().and_then(|v| v.parse().ok()).ok_or_else(bad)?;
            let b = it.next().and_then(|v| v.parse().ok()).ok_or_else(bad)?;
            if it.next().is_some() {
                return Err(bad());
            }
            Ok((a, b))
        })
        .collect()
}

fn cmd_match(ctx: &Ctx, tags_path: &Path, pairs_path: &Path, context: Option<&Path>) -> Result<(), CliError> {
    let tags: Vec<FdTag> = serde_json::from_str(&read_text(tags_path)?).map_err(validation)?;
    let context_path = context.map(Path::to_path_buf).unwrap_or_else(|| {
        tags_path.parent().unwrap_or(Path::new(".")).join("context.json")
    });
    let context: FormalContext = serde_json::from_str(&read_text(&context_path)?).map_err(validation)?;
    let resources = if context.roles() == ContextRoles::ResourcesAsObjects { context } else { context.transposed() };
    let pairs = parse_pairs(&read_text(pairs_path)?)?;
    let find = |id: usize| {
        tags.iter()
            .find(|t| t.id == id)
            .ok_or_else(|| CliError::Validation(format!("unknown tag id {id}")))
    };
    let mut out = String::from("tag_a,tag_b,score\n");
    for (a, b) in &pairs {
        let score = ontology_match(find(*a)?, find(*b)?, &resources).map_err(validation)?;
        let _ = writeln!(out, "{a},{b},{score:.6}");
    }
    write_atomic(&ctx.path("match.csv"), out.as_bytes())?;
    ctx.say(&format!("pairs={}", pairs.len()));
    Ok(())
}

#[derive(Serialize)]
struct NamedConcept<'a> {
    extent: Vec<&'a str>,
    intent: Vec<&'a str>,
}

fn cmd_export(ctx: &Ctx, lattice: Option<&Path>, context: Option<&Path>) -> Result<(), CliError> {
    if lattice.is_none() && context.is_none() {
        return Err(CliError::Validation("export needs --lattice and/or --context".into()));
    }
    if let Some(p) = lattice {
        let l = load_lattice(p)?;
        let mut nodes = String::from("id,generation,tag,x,y,z\n");
        for n in &l.nodes {
            let tag = n.tag.map(|t| t.to_string()).unwrap_or_default();
            let [x, y, z] = n.coords;
            let _ = writeln!(nodes, "{},{},{tag},{x:?},{y:?},{z:?}", n.id, n.generation);
        }
        let mut bonds = String::from("id,a,b,stiffness,intact\n");
        for (i, b) in l.bonds.iter().enumerate() {
            let _ = writeln!(bonds, "{i},{},{},{:?},{}", b.a, b.b, b.stiffness, b.intact);
        }
        write_atomic(&ctx.path("nodes.csv"), nodes.as_bytes())?;
        write_atomic(&ctx.path("bonds.csv"), bonds.as_bytes())?;
        ctx.say(&format!("nodes={} bonds={}", l.len(), l.bonds.len()));
    }
    if let Some(p) = context {
        let c: FormalContext = serde_json::from_str(&read_text(p)?).map_err(validation)?;
        let concepts = enumerate_concepts(&c).map_err(validation)?;
        let named: Vec<NamedConcept> = concepts
            .iter()
            .map(|k| NamedConcept { extent: k.extent_names(&c), intent: k.intent_names(&c) })
            .collect();
        write_atomic(&ctx.path("concepts.json"), &json(&named))?;
        ctx.say(&format!("concepts={}", named.len()));
    }
    Ok(())
}
