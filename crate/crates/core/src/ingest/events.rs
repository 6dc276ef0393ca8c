use std::collections::BTreeMap;
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use super::IngestError;

/// One folksonomy tagging observation: a label attached to a resource,
/// together with its display and click counters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TagEvent {
    #[serde(rename = "tag")]
    pub tag_label: String,
    #[serde(rename = "uri")]
    pub resource_uri: String,
    #[serde(rename = "ts")]
    pub timestamp: i64,
    #[serde(rename = "imp")]
    pub impressions: u64,
    #[serde(rename = "clk")]
    pub clicks: u64,
}

impl TagEvent {
    pub fn new(tag: &str, uri: &str, timestamp: i64, impressions: u64, clicks: u64) -> Self {
        Self {
            tag_label: tag.to_string(),
            resource_uri: uri.to_string(),
            timestamp,
            impressions,
            clicks,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.clicks > self.impressions {
            return Err(format!(
                "clicks ({}) exceed impressions ({})",
                self.clicks, self.impressions
            ));
        }
        if self.resource_uri.is_empty() {
            return Err("empty resource uri".into());
        }
        if self.tag_label.trim().is_empty() {
            return Err("empty tag label".into());
        }
        Ok(())
    }

    /// Grouping key used for exposition and FD tags. The label is trimmed.
    pub fn key(&self) -> TagKey {
        TagKey {
            tag: self.tag_label.trim().to_string(),
            uri: self.resource_uri.clone(),
        }
    }
}

/// `(tag label, resource uri)` pair.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TagKey {
    pub tag: String,
    pub uri: String,
}

impl TagKey {
    pub fn new(tag: &str, uri: &str) -> Self {
        Self {
            tag: tag.to_string(),
            uri: uri.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineError {
    /// 1-based line number.
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, Default)]
pub struct ParseReport {
    pub events: Vec<TagEvent>,
    pub errors: Vec<LineError>,
}

impl ParseReport {
    pub fn skipped(&self) -> usize {
        self.errors.len()
    }
}

/// Reads line-delimited JSON tag events.
///
/// Malformed lines (bad JSON, missing fields, invariant violations, invalid
/// UTF-8) are logged and skipped; whitespace-only lines are ignored. Only a
/// failing reader aborts the parse.
pub fn parse_events<R: BufRead>(mut reader: R) -> Result<ParseReport, IngestError> {
    let mut report = ParseReport::default();
    let mut buf = Vec::new();
    let mut line_no = 0;
    loop {
        buf.clear();
        if reader.read_until(b'\n', &mut buf)? == 0 {
            break;
        }
        line_no += 1;
        let line = match std::str::from_utf8(&buf) {
            Ok(s) => s.trim_end_matches(['\n', '\r']),
            Err(e) => {
                skip(&mut report, line_no, format!("invalid utf-8: {e}"));
                continue;
            }
        };
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<TagEvent>(line) {
            Ok(ev) => match ev.validate() {
                Ok(()) => report.events.push(ev),
                Err(msg) => skip(&mut report, line_no, msg),
            },
            Err(e) => skip(&mut report, line_no, e.to_string()),
        }
    }
    Ok(report)
}

fn skip(report: &mut ParseReport, line: usize, message: String) {
    log::warn!("skipping event line {line}: {message}");
    report.errors.push(LineError { line, message });
}

/// Canonical single-line JSON for an event (field order `tag,uri,ts,imp,clk`).
pub fn serialize_event(event: &TagEvent) -> String {
    serde_json::to_string(event).expect("tag events always serialize")
}

/// Click-through exposition per `(tag, uri)` group.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExpositionTable {
    pub values: BTreeMap<TagKey, f64>,
    /// Groups whose pooled impressions are zero; their ratio is undefined.
    pub undefined: Vec<TagKey>,
}

impl ExpositionTable {
    pub fn get(&self, key: &TagKey) -> Option<f64> {
        self.values.get(key).copied()
    }
}

/// Pools all events of each `(tag, uri)` group and returns Σclicks / Σimpressions.
pub fn compute_exposition(events: &[TagEvent]) -> ExpositionTable {
    let mut sums: BTreeMap<TagKey, (u128, u128)> = BTreeMap::new();
    for ev in events {
        let entry = sums.entry(ev.key()).or_default();
        entry.0 += u128::from(ev.clicks);
        entry.1 += u128::from(ev.impressions);
    }
    let mut table = ExpositionTable::default();
    for (key, (clicks, impressions)) in sums {
        if impressions == 0 {
            log::warn!("exposition undefined for ({}, {}): zero impressions", key.tag, key.uri);
            table.undefined.push(key);
        } else {
            table.values.insert(key, clicks as f64 / impressions as f64);
        }
    }
    table
}

/// Distinct `(tag, uri)` pairs in sorted order.
pub fn tag_pairs(events: &[TagEvent]) -> Vec<TagKey> {
    let mut keys: Vec<TagKey> = events.iter().map(TagEvent::key).collect();
    keys.sort();
    keys.dedup();
    keys
}
