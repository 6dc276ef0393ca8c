use std::fmt::Write as _;

use serde::Serialize;

use super::{CurveSample, EventKind, EventLog};

pub const CURVE_HEADER: &str = "step,strain,stress,broken,new,plastic_fraction";

/// Curve as CSV. Floats use Rust's shortest round-trip formatting, which
/// never depends on locale.
pub fn curve_csv(samples: &[CurveSample]) -> String {
    let mut out = String::from(CURVE_HEADER);
    out.push('\n');
    for s in samples {
        let _ = writeln!(
            out,
            "{},{:?},{:?},{},{},{:?}",
            s.step, s.applied_strain, s.mean_effective_stress, s.broken_bonds, s.new_bonds, s.plastic_fraction
        );
    }
    out
}

/// Inverse of [`curve_csv`].
pub fn parse_curve_csv(text: &str) -> Result<Vec<CurveSample>, String> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == CURVE_HEADER => {}
        other => return Err(format!("unexpected header {other:?}")),
    }
    lines
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, line)| {
            let f: Vec<&str> = line.split(',').collect();
            let bad = |what: &str| format!("row {}: bad {what}", i + 1);
            if f.len() != 6 {
                return Err(bad("column count"));
            }
            Ok(CurveSample {
                step: f[0].parse().map_err(|_| bad("step"))?,
                applied_strain: f[1].parse().map_err(|_| bad("strain"))?,
                mean_effective_stress: f[2].parse().map_err(|_| bad("stress"))?,
                broken_bonds: f[3].parse().map_err(|_| bad("broken"))?,
                new_bonds: f[4].parse().map_err(|_| bad("new"))?,
                plastic_fraction: f[5].parse().map_err(|_| bad("plastic_fraction"))?,
            })
        })
        .collect()
}

#[derive(Serialize)]
struct Line {
    step: usize,
    kind: EventKind,
    id: usize,
    detail: f64,
}

pub fn events_jsonl(log: &EventLog) -> String {
    let mut out = String::new();
    for e in &log.events {
        let line = Line { step: e.step, kind: e.kind, id: e.id, detail: e.detail };
        out.push_str(&serde_json::to_string(&line).expect("event serializes"));
        out.push('\n');
    }
    out
}
