use serde::{Deserialize, Serialize};

use super::LatticeError;
use crate::ingest::{FdTag, FormalContext};

/// Quadratic form used for distances in (C, E, R) space.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Signature {
    #[default]
    Euclidean,
    /// `(+, +, -)`: the resource axis enters with a negative sign.
    Minkowski,
}

impl Signature {
    /// Signed squared interval between two embeddings.
    pub fn interval(self, x: &[f64; 3], y: &[f64; 3]) -> f64 {
        let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
        match self {
            Signature::Euclidean => d[0] * d[0] + d[1] * d[1] + d[2] * d[2],
            Signature::Minkowski => d[0] * d[0] + d[1] * d[1] - d[2] * d[2],
        }
    }

    /// `sqrt(|interval|)`.
    pub fn distance(self, x: &[f64; 3], y: &[f64; 3]) -> f64 {
        self.interval(x, y).abs().sqrt()
    }
}

// FNV-1a over the bytes, then the splitmix64 finalizer for avalanche.
fn stable_hash(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h = (h ^ (h >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    h = (h ^ (h >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    h ^ (h >> 31)
}

/// Resource coordinate: the uri's stable 64-bit hash mapped into `[0, 1)`.
pub fn uri_coordinate(uri: &str) -> f64 {
    (stable_hash(uri.as_bytes()) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Embeds an FD tag as `(c, e, r)`: the share of the token side carried by the
/// tag's resource, its exposition, and the resource hash coordinate.
pub fn embed(fd: &FdTag, context: &FormalContext) -> Result<[f64; 3], LatticeError> {
    let (profile, size) = context.resource_profile(&fd.context_ref)?;
    let c = if size == 0 {
        0.0
    } else {
        profile.count_ones(..) as f64 / size as f64
    };
    let x = [c, fd.exposition, uri_coordinate(&fd.resource)];
    if x.iter().all(|v| v.is_finite()) {
        Ok(x)
    } else {
        Err(LatticeError::Malformed(format!("non-finite embedding for tag {}", fd.id)))
    }
}

/// Jaccard overlap of the closed intents of the two tags' resources.
/// Two empty intents score 0.
pub fn ontology_match(a: &FdTag, b: &FdTag, context: &FormalContext) -> Result<f64, LatticeError> {
    let lookup = |t: &FdTag| {
        context
            .resource_profile(&t.context_ref)
            .map(|(p, _)| p)
            .map_err(|_| LatticeError::UnknownTag(format!("{} ({})", t.id, t.context_ref)))
    };
    let pa = lookup(a)?;
    let pb = lookup(b)?;
    let inter = pa.intersection_count(&pb);
    let union = pa.union_count(&pb);
    Ok(if union == 0 { 0.0 } else { inter as f64 / union as f64 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{ContextRoles, TagEvent};
    use proptest::prelude::*;

    fn fd(uri: &str, e: f64) -> FdTag {
        FdTag {
            id: 0,
            label: "x".into(),
            context_ref: uri.into(),
            exposition: e,
            resource: uri.into(),
            embedding: [0.0; 3],
        }
    }

    fn ctx(rows: &[(&str, &[usize])], attrs: usize) -> FormalContext {
        let objects = rows.iter().map(|r| r.0.to_string()).collect();
        let attributes = (1..=attrs).map(|i| format!("d{i}")).collect();
        let pairs: Vec<[usize; 2]> =
            rows.iter().enumerate().flat_map(|(t, r)| r.1.iter().map(move |&d| [t, d])).collect();
        FormalContext::new(objects, attributes, &pairs).unwrap()
    }

    #[test]
    fn embedding_examples() {
        let c = ctx(&[("u", &[])], 0);
        let x = embed(&fd("u", 0.0), &c).unwrap();
        assert_eq!(&x[..2], &[0.0, 0.0]);
        assert!((0.0..1.0).contains(&x[2]));

        let c = ctx(&[("u", &[0, 1, 2])], 3);
        assert_eq!(&embed(&fd("u", 1.0), &c).unwrap()[..2], &[1.0, 1.0]);

        let c = ctx(&[("u", &[2]), ("v", &[0, 1, 3])], 4);
        assert_eq!(&embed(&fd("u", 0.5), &c).unwrap()[..2], &[0.25, 0.5]);

        assert!(embed(&fd("missing", 0.5), &c).is_err());
    }

    #[test]
    fn embedding_is_deterministic() {
        let evs = [TagEvent::new("news football", "http://a", 0, 10, 3)];
        let c = FormalContext::from_events(&evs, ContextRoles::default());
        let a = embed(&fd("http://a", 0.3), &c).unwrap();
        let b = embed(&fd("http://a", 0.3), &c).unwrap();
        assert_eq!(a.map(f64::to_bits), b.map(f64::to_bits));
        assert_ne!(uri_coordinate("http://a"), uri_coordinate("http://b"));
    }

    #[test]
    fn match_examples() {
        let c = ctx(&[("a", &[0, 1]), ("b", &[0, 2]), ("c", &[3]), ("e", &[])], 4);
        assert_eq!(ontology_match(&fd("a", 0.1), &fd("a", 0.9), &c).unwrap(), 1.0);
        assert_eq!(ontology_match(&fd("a", 0.1), &fd("c", 0.1), &c).unwrap(), 0.0);
        assert_eq!(ontology_match(&fd("a", 0.1), &fd("b", 0.1), &c).unwrap(), 1.0 / 3.0);
        assert_eq!(ontology_match(&fd("e", 0.1), &fd("e", 0.1), &c).unwrap(), 0.0);
        assert!(matches!(ontology_match(&fd("a", 0.1), &fd("zz", 0.1), &c), Err(LatticeError::UnknownTag(_))));
    }

    #[test]
    fn minkowski_signature() {
        let x = [0.0, 0.0, 0.0];
        let y = [1.0, 0.0, 2.0];
        assert_eq!(Signature::Euclidean.interval(&x, &y), 5.0);
        assert_eq!(Signature::Minkowski.interval(&x, &y), -3.0);
        assert_eq!(Signature::Minkowski.distance(&x, &y), 3f64.sqrt());
    }

    proptest! {
        #[test]
        fn uri_coordinate_in_unit_interval(uri in ".{0,40}") {
            let r = uri_coordinate(&uri);
            prop_assert!((0.0..1.0).contains(&r));
        }

        #[test]
        fn match_symmetric_and_bounded(bits in proptest::collection::vec(any::<bool>(), 24), i in 0usize..4, j in 0usize..4) {
            let rows: Vec<(String, Vec<usize>)> = (0..4)
                .map(|t| (format!("u{t}"), (0..6).filter(|d| bits[t * 6 + d]).collect()))
                .collect();
            let refs: Vec<(&str, &[usize])> = rows.iter().map(|(n, r)| (n.as_str(), r.as_slice())).collect();
            let c = ctx(&refs, 6);
            let (a, b) = (fd(&format!("u{i}"), 0.5), fd(&format!("u{j}"), 0.5));
            let s = ontology_match(&a, &b, &c).unwrap();
            prop_assert_eq!(s, ontology_match(&b, &a, &c).unwrap());
            prop_assert!((0.0..=1.0).contains(&s));
        }
    }
}
