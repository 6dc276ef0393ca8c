use std::fmt::Display;

use serde::{Deserialize, Serialize};

use super::{ExpositionTable, FormalContext, IngestError, TagKey};

/// A folksodriven tag: formal-context reference, time exposition, resource
/// and its embedding vector in (C, E, R) space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FdTag {
    pub id: usize,
    /// Tag label the pair was keyed on.
    pub label: String,
    /// Id of the resource inside the formal context.
    pub context_ref: String,
    /// Click-through rate in `[0, 1]`.
    pub exposition: f64,
    pub resource: String,
    pub embedding: [f64; 3],
}

/// One FD tag per `(tag, uri)` pair, ids assigned in the order of `pairs`.
///
/// `embed` receives each tag with a zero embedding and returns its vector.
pub fn build_fd_tags<F, E>(
    context: &FormalContext,
    pairs: &[TagKey],
    exposition: &ExpositionTable,
    embed: F,
) -> Result<Vec<FdTag>, IngestError>
where
    F: Fn(&FdTag, &FormalContext) -> Result<[f64; 3], E>,
    E: Display,
{
    let missing: Vec<TagKey> = pairs.iter().filter(|k| exposition.get(k).is_none()).cloned().collect();
    if !missing.is_empty() {
        return Err(IngestError::MissingExposition(missing));
    }
    pairs
        .iter()
        .enumerate()
        .map(|(id, key)| {
            let mut tag = FdTag {
                id,
                label: key.tag.clone(),
                context_ref: key.uri.clone(),
                exposition: exposition.get(key).expect("checked above"),
                resource: key.uri.clone(),
                embedding: [0.0; 3],
            };
            tag.embedding = embed(&tag, context).map_err(|e| IngestError::Embedding {
                uri: key.uri.clone(),
                reason: e.to_string(),
            })?;
            Ok(tag)
        })
        .collect()
}
