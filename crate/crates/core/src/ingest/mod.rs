//! Tag-event ingestion: click-through exposition, tokenization, formal
//! contexts (objects, attributes, incidence) and FD tags.

mod context;
mod events;
mod fd;
mod tokenize;

pub use context::{
    brute_force_concepts, enumerate_concepts, enumerate_concepts_bounded, Concept, ContextRoles,
    FormalContext, Side, DEFAULT_CONCEPT_BOUND,
};
pub use events::{
    compute_exposition, parse_events, serialize_event, tag_pairs, ExpositionTable, LineError,
    ParseReport, TagEvent, TagKey,
};
pub use fd::{build_fd_tags, FdTag};
pub use tokenize::{tokenize, STOPWORDS};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("i/o error reading events: {0}")]
    Io(#[from] std::io::Error),
    #[error("unknown {side} id `{id}`")]
    UnknownId { side: &'static str, id: String },
    #[error("context too large for concept enumeration: {cells} incidence cells exceeds bound {bound}")]
    ContextTooLarge { cells: usize, bound: usize },
    #[error("missing exposition for {} pair(s): {}", .0.len(), format_keys(.0))]
    MissingExposition(Vec<TagKey>),
    #[error("invalid formal context: {0}")]
    InvalidContext(String),
    #[error("embedding failed for `{uri}`: {reason}")]
    Embedding { uri: String, reason: String },
}

fn format_keys(keys: &[TagKey]) -> String {
    keys.iter()
        .map(|k| format!("({}, {})", k.tag, k.uri))
        .collect::<Vec<_>>()
        .join(", ")
}
