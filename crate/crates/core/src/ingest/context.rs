use std::collections::{BTreeMap, BTreeSet, HashSet};

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use super::{tokenize, IngestError, TagEvent};

/// Default refusal bound on `|objects| * |attributes|` for concept enumeration.
pub const DEFAULT_CONCEPT_BOUND: usize = 1_000_000;

/// Which event field plays the object role.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContextRoles {
    /// Objects are resource uris, attributes are tag tokens.
    #[default]
    ResourcesAsObjects,
    /// Objects are tag tokens, attributes are resource uris.
    TokensAsObjects,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Objects,
    Attributes,
}

impl Side {
    fn name(self) -> &'static str {
        match self {
            Side::Objects => "object",
            Side::Attributes => "attribute",
        }
    }
}

/// Formal context `(T, D, I)`. Incidence is stored as one bit row per object.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormalContext {
    objects: Vec<String>,
    attributes: Vec<String>,
    rows: Vec<FixedBitSet>,
    roles: ContextRoles,
}

#[derive(Serialize, Deserialize)]
struct ContextJson {
    objects: Vec<String>,
    attributes: Vec<String>,
    incidence: Vec<[usize; 2]>,
    #[serde(default)]
    roles: ContextRoles,
}

impl Serialize for FormalContext {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        ContextJson {
            objects: self.objects.clone(),
            attributes: self.attributes.clone(),
            incidence: self.incidence_pairs(),
            roles: self.roles,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for FormalContext {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = ContextJson::deserialize(d)?;
        let mut ctx = FormalContext::new(raw.objects, raw.attributes, &raw.incidence)
            .map_err(serde::de::Error::custom)?;
        ctx.roles = raw.roles;
        Ok(ctx)
    }
}

impl FormalContext {
    /// Builds a context from names and `(object index, attribute index)` pairs.
    pub fn new(
        objects: Vec<String>,
        attributes: Vec<String>,
        incidence: &[[usize; 2]],
    ) -> Result<Self, IngestError> {
        check_unique(&objects, "object")?;
        check_unique(&attributes, "attribute")?;
        let mut rows = vec![FixedBitSet::with_capacity(attributes.len()); objects.len()];
        for &[t, d] in incidence {
            if t >= objects.len() || d >= attributes.len() {
                return Err(IngestError::InvalidContext(format!(
                    "incidence pair ({t}, {d}) out of range for {}x{} context",
                    objects.len(),
                    attributes.len()
                )));
            }
            rows[t].insert(d);
        }
        Ok(Self {
            objects,
            attributes,
            rows,
            roles: ContextRoles::default(),
        })
    }

    pub fn empty() -> Self {
        Self::new(Vec::new(), Vec::new(), &[]).expect("empty context is valid")
    }

    pub fn objects(&self) -> &[String] {
        &self.objects
    }

    pub fn attributes(&self) -> &[String] {
        &self.attributes
    }

    pub fn roles(&self) -> ContextRoles {
        self.roles
    }

    pub fn has(&self, object: usize, attribute: usize) -> bool {
        self.rows[object].contains(attribute)
    }

    pub fn incidence_pairs(&self) -> Vec<[usize; 2]> {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(t, row)| row.ones().map(move |d| [t, d]))
            .collect()
    }

    pub fn incidence_count(&self) -> usize {
        self.rows.iter().map(|r| r.count_ones(..)).sum()
    }

    pub fn object_index(&self, id: &str) -> Option<usize> {
        self.objects.iter().position(|o| o == id)
    }

    pub fn attribute_index(&self, id: &str) -> Option<usize> {
        self.attributes.iter().position(|a| a == id)
    }

    /// Swaps objects and attributes.
    pub fn transposed(&self) -> Self {
        let pairs: Vec<[usize; 2]> = self.incidence_pairs().into_iter().map(|[t, d]| [d, t]).collect();
        let mut out = Self::new(self.attributes.clone(), self.objects.clone(), &pairs)
            .expect("transpose of a valid context is valid");
        out.roles = match self.roles {
            ContextRoles::ResourcesAsObjects => ContextRoles::TokensAsObjects,
            ContextRoles::TokensAsObjects => ContextRoles::ResourcesAsObjects,
        };
        out
    }

    /// `A′`: attributes shared by every object in `objects`.
    pub fn derive_objects(&self, objects: &FixedBitSet) -> FixedBitSet {
        let mut out = FixedBitSet::with_capacity(self.attributes.len());
        out.insert_range(..);
        for t in objects.ones() {
            out.intersect_with(&self.rows[t]);
        }
        out
    }

    /// `B′`: objects carrying every attribute in `attributes`.
    pub fn derive_attributes(&self, attributes: &FixedBitSet) -> FixedBitSet {
        let mut out = FixedBitSet::with_capacity(self.objects.len());
        for (t, row) in self.rows.iter().enumerate() {
            if attributes.is_subset(row) {
                out.insert(t);
            }
        }
        out
    }

    /// Prime operator on named ids drawn from one side of the context.
    pub fn derive(&self, side: Side, ids: &[&str]) -> Result<Vec<String>, IngestError> {
        let (names, other) = match side {
            Side::Objects => (&self.objects, &self.attributes),
            Side::Attributes => (&self.attributes, &self.objects),
        };
        let mut set = FixedBitSet::with_capacity(names.len());
        for id in ids {
            let idx = names.iter().position(|n| n == id).ok_or_else(|| IngestError::UnknownId {
                side: side.name(),
                id: id.to_string(),
            })?;
            set.insert(idx);
        }
        let derived = match side {
            Side::Objects => self.derive_objects(&set),
            Side::Attributes => self.derive_attributes(&set),
        };
        Ok(derived.ones().map(|i| other[i].clone()).collect())
    }

    /// Tokens attached to a resource, whichever side the resource lives on,
    /// together with the size of the token side.
    pub fn resource_profile(&self, uri: &str) -> Result<(FixedBitSet, usize), IngestError> {
        match self.roles {
            ContextRoles::ResourcesAsObjects => {
                let t = self.object_index(uri).ok_or_else(|| IngestError::UnknownId {
                    side: "object",
                    id: uri.to_string(),
                })?;
                let mut single = FixedBitSet::with_capacity(self.objects.len());
                single.insert(t);
                Ok((self.derive_objects(&single), self.attributes.len()))
            }
            ContextRoles::TokensAsObjects => {
                let d = self.attribute_index(uri).ok_or_else(|| IngestError::UnknownId {
                    side: "attribute",
                    id: uri.to_string(),
                })?;
                let mut single = FixedBitSet::with_capacity(self.attributes.len());
                single.insert(d);
                Ok((self.derive_attributes(&single), self.objects.len()))
            }
        }
    }

    /// Builds the context from events: objects are distinct resources, the
    /// attributes of a resource are the tokens of every tag label seen on it.
    /// With [`ContextRoles::TokensAsObjects`] the result is transposed.
    pub fn from_events(events: &[TagEvent], roles: ContextRoles) -> Self {
        let mut by_uri: BTreeMap<&str, BTreeSet<String>> = BTreeMap::new();
        for ev in events {
            by_uri.entry(&ev.resource_uri).or_default().extend(tokenize(&ev.tag_label));
        }
        let attributes: Vec<String> = by_uri
            .values()
            .flatten()
            .cloned()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let objects: Vec<String> = by_uri.keys().map(|u| u.to_string()).collect();
        let mut pairs = Vec::new();
        for (t, tokens) in by_uri.values().enumerate() {
            for tok in tokens {
                let d = attributes.binary_search(tok).expect("token collected above");
                pairs.push([t, d]);
            }
        }
        let ctx = Self::new(objects, attributes, &pairs).expect("names are deduplicated");
        match roles {
            ContextRoles::ResourcesAsObjects => ctx,
            ContextRoles::TokensAsObjects => ctx.transposed(),
        }
    }
}

fn check_unique(names: &[String], side: &str) -> Result<(), IngestError> {
    let mut seen = HashSet::new();
    for n in names {
        if !seen.insert(n) {
            return Err(IngestError::InvalidContext(format!("duplicate {side} `{n}`")));
        }
    }
    Ok(())
}

/// A closed `(extent, intent)` pair, as sorted object / attribute indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Concept {
    pub extent: Vec<usize>,
    pub intent: Vec<usize>,
}

impl Concept {
    pub fn extent_names<'a>(&self, ctx: &'a FormalContext) -> Vec<&'a str> {
        self.extent.iter().map(|&i| ctx.objects[i].as_str()).collect()
    }

    pub fn intent_names<'a>(&self, ctx: &'a FormalContext) -> Vec<&'a str> {
        self.intent.iter().map(|&i| ctx.attributes[i].as_str()).collect()
    }
}

fn sort_concepts(concepts: &mut [Concept]) {
    concepts.sort_by(|a, b| a.extent.len().cmp(&b.extent.len()).then_with(|| a.extent.cmp(&b.extent)));
}

pub fn enumerate_concepts(ctx: &FormalContext) -> Result<Vec<Concept>, IngestError> {
    enumerate_concepts_bounded(ctx, DEFAULT_CONCEPT_BOUND)
}

/// All formal concepts, sorted by extent size then lexicographic extent.
///
/// Extents are generated in lectic order with the next-closure step over
/// objects, so memory stays proportional to the output.
pub fn enumerate_concepts_bounded(ctx: &FormalContext, bound: usize) -> Result<Vec<Concept>, IngestError> {
    let n = ctx.objects.len();
    let cells = n.saturating_mul(ctx.attributes.len());
    if cells > bound {
        return Err(IngestError::ContextTooLarge { cells, bound });
    }
    let close = |set: &FixedBitSet| {
        let intent = ctx.derive_objects(set);
        (ctx.derive_attributes(&intent), intent)
    };
    let mut out = Vec::new();
    let (mut extent, mut intent) = close(&FixedBitSet::with_capacity(n));
    loop {
        out.push(Concept {
            extent: extent.ones().collect(),
            intent: intent.ones().collect(),
        });
        let mut advanced = false;
        for i in (0..n).rev() {
            if extent.contains(i) {
                continue;
            }
            let mut candidate = FixedBitSet::with_capacity(n);
            for j in extent.ones().take_while(|&j| j < i) {
                candidate.insert(j);
            }
            candidate.insert(i);
            let (next, next_intent) = close(&candidate);
            // canonicity: closing must not add anything below i
            let added_below = next.ones().take_while(|&j| j < i).any(|j| !extent.contains(j));
            if !added_below {
                extent = next;
                intent = next_intent;
                advanced = true;
                break;
            }
        }
        if !advanced {
            break;
        }
    }
    sort_concepts(&mut out);
    Ok(out)
}

/// Reference enumeration: closes every subset of objects and deduplicates.
/// Exponential in the object count; intended as an oracle for small contexts.
pub fn brute_force_concepts(ctx: &FormalContext) -> Vec<Concept> {
    let n = ctx.objects.len();
    let m = ctx.attributes.len();
    assert!(n <= 20, "brute force limited to 20 objects");
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for mask in 0u32..(1u32 << n) {
        let intent: Vec<usize> = (0..m)
            .filter(|&d| (0..n).filter(|&t| mask >> t & 1 == 1).all(|t| ctx.has(t, d)))
            .collect();
        let extent: Vec<usize> = (0..n).filter(|&t| intent.iter().all(|&d| ctx.has(t, d))).collect();
        let c = Concept { extent, intent };
        if seen.insert(c.clone()) {
            out.push(c);
        }
    }
    sort_concepts(&mut out);
    out
}
