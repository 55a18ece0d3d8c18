use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::keyspace::{Key, PermutationParams};
use crate::report::{ElementKind, Unit};
use crate::sketch::SetElement;

use super::FlowRecord;

/// Permutation applied to the destination before folding a pair.
pub const PAIR_GAMMA: u32 = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KeySpec {
    #[default]
    Src,
    Dst,
    /// `(src, dst)` folded to 32 bits; not invertible.
    Pair,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ValueSpec {
    #[default]
    Bytes,
    Packets,
    Occurrences,
    SetDst,
    SetDport,
    SetTtl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SignalSpec {
    pub key: KeySpec,
    pub value: ValueSpec,
}

impl ValueSpec {
    pub fn is_set(self) -> bool {
        self.element_kind().is_some()
    }

    pub fn element_kind(self) -> Option<ElementKind> {
        match self {
            ValueSpec::SetDst => Some(ElementKind::Dst),
            ValueSpec::SetDport => Some(ElementKind::Dport),
            ValueSpec::SetTtl => Some(ElementKind::Ttl),
            _ => None,
        }
    }

    pub fn unit(self) -> Unit {
        match self {
            ValueSpec::Bytes => Unit::Bytes,
            ValueSpec::Packets => Unit::Packets,
            ValueSpec::Occurrences => Unit::Occurrences,
            _ => Unit::Distinct,
        }
    }
}

impl FromStr for KeySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "src" => Ok(KeySpec::Src),
            "dst" => Ok(KeySpec::Dst),
            "pair" | "src_dst_pair" => Ok(KeySpec::Pair),
            other => Err(Error::InvalidConfig(format!(
                "unknown key spec {other:?} (src, dst, pair)"
            ))),
        }
    }
}

impl FromStr for ValueSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "bytes" => Ok(ValueSpec::Bytes),
            "packets" => Ok(ValueSpec::Packets),
            "occurrences" | "count" => Ok(ValueSpec::Occurrences),
            "set:dst" => Ok(ValueSpec::SetDst),
            "set:dport" => Ok(ValueSpec::SetDport),
            "set:ttl" => Ok(ValueSpec::SetTtl),
            other => Err(Error::InvalidConfig(format!(
                "unknown value spec {other:?} (bytes, packets, occurrences, set:dst, set:dport, set:ttl)"
            ))),
        }
    }
}

impl fmt::Display for KeySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KeySpec::Src => "src",
            KeySpec::Dst => "dst",
            KeySpec::Pair => "pair",
        })
    }
}

impl fmt::Display for ValueSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ValueSpec::Bytes => "bytes",
            ValueSpec::Packets => "packets",
            ValueSpec::Occurrences => "occurrences",
            ValueSpec::SetDst => "set:dst",
            ValueSpec::SetDport => "set:dport",
            ValueSpec::SetTtl => "set:ttl",
        })
    }
}

/// What one record contributes to the signal of its key.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Update {
    Scalar(u64),
    Element(SetElement),
}

/// `permute(src) XOR permute'(dst)` with the default and the pair permutation.
pub fn fold_pair(src: Key, dst: Key) -> Key {
    let a = PermutationParams::default().permute(src);
    let b = PermutationParams::new(PAIR_GAMMA)
        .expect("nonzero gamma")
        .permute(dst);
    Key(a.0 ^ b.0)
}

/// Maps records to `(key, update)` and counts the records it had to skip.
#[derive(Debug, Clone)]
pub struct Extractor {
    spec: SignalSpec,
    src_params: PermutationParams,
    dst_params: PermutationParams,
    skipped: u64,
}

impl Extractor {
    pub fn new(spec: SignalSpec) -> Self {
        Self {
            spec,
            src_params: PermutationParams::default(),
            dst_params: PermutationParams::new(PAIR_GAMMA).expect("nonzero gamma"),
            skipped: 0,
        }
    }

    pub fn spec(&self) -> SignalSpec {
        self.spec
    }

    /// Records without a TTL under `set:ttl`.
    pub fn skipped(&self) -> u64 {
        self.skipped
    }

    pub fn key(&self, r: &FlowRecord) -> Key {
        match self.spec.key {
            KeySpec::Src => r.src,
            KeySpec::Dst => r.dst,
            KeySpec::Pair => {
                Key(self.src_params.permute(r.src).0 ^ self.dst_params.permute(r.dst).0)
            }
        }
    }

    pub fn extract(&mut self, r: &FlowRecord) -> Option<(Key, Update)> {
        let update = match self.spec.value {
            ValueSpec::Bytes => Update::Scalar(r.bytes),
            ValueSpec::Packets => Update::Scalar(r.packets),
            ValueSpec::Occurrences => Update::Scalar(1),
            ValueSpec::SetDst => Update::Element(SetElement(r.dst.0)),
            ValueSpec::SetDport => Update::Element(SetElement(r.dport.into())),
            ValueSpec::SetTtl => match r.ttl {
                Some(ttl) => Update::Element(SetElement(ttl.into())),
                None => {
                    self.skipped += 1;
                    return None;
                }
            },
        };
        Some((self.key(r), update))
    }
}

/// Finds, for each folded pair key, the first `(src, dst)` in `records` that folds to it.
pub fn pair_candidates(records: &[FlowRecord], wanted: &[Key]) -> HashMap<Key, (Key, Key)> {
    let ex = Extractor::new(SignalSpec {
        key: KeySpec::Pair,
        value: ValueSpec::Occurrences,
    });
    let mut out = HashMap::new();
    for r in records {
        if out.len() == wanted.len() {
            break;
        }
        let k = ex.key(r);
        if wanted.contains(&k) {
            out.entry(k).or_insert((r.src, r.dst));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::parse_record;

    fn record() -> FlowRecord {
        parse_record("10.5,192.168.0.1,10.0.0.2,1234,80,6,3,1500").unwrap()
    }

    fn spec(key: &str, value: &str) -> SignalSpec {
        SignalSpec {
            key: key.parse().unwrap(),
            value: value.parse().unwrap(),
        }
    }

    #[test]
    fn examples() {
        let mut ex = Extractor::new(spec("src", "bytes"));
        assert_eq!(
            ex.extract(&record()),
            Some((Key(0xC0A8_0001), Update::Scalar(1500)))
        );
        let mut ex = Extractor::new(spec("src", "set:dport"));
        assert_eq!(
            ex.extract(&record()).unwrap().1,
            Update::Element(SetElement(80))
        );
        let mut ex = Extractor::new(spec("src", "occurrences"));
        assert_eq!(ex.extract(&record()).unwrap().1, Update::Scalar(1));
        let mut ex = Extractor::new(spec("dst", "packets"));
        assert_eq!(
            ex.extract(&record()),
            Some((Key(0x0A00_0002), Update::Scalar(3)))
        );
        let mut ex = Extractor::new(spec("src", "set:dst"));
        assert_eq!(
            ex.extract(&record()).unwrap().1,
            Update::Element(SetElement(0x0A00_0002))
        );
    }

    #[test]
    fn missing_ttl_is_skipped_and_counted() {
        let mut ex = Extractor::new(spec("src", "set:ttl"));
        assert_eq!(ex.extract(&record()), None);
        assert_eq!(ex.extract(&record()), None);
        assert_eq!(ex.skipped(), 2);
        let mut with_ttl = record();
        with_ttl.ttl = Some(64);
        assert_eq!(
            ex.extract(&with_ttl).unwrap().1,
            Update::Element(SetElement(64))
        );
        assert_eq!(ex.skipped(), 2);
    }

    #[test]
    fn pair_fold_and_lookup() {
        let r = record();
        let ex = Extractor::new(spec("pair", "bytes"));
        let k = ex.key(&r);
        assert_eq!(k, fold_pair(r.src, r.dst));
        assert_ne!(fold_pair(r.src, r.dst), fold_pair(r.dst, r.src));
        let table = pair_candidates(&[r], &[k]);
        assert_eq!(table[&k], (r.src, r.dst));
    }

    #[test]
    fn spec_parsing() {
        assert!("nope".parse::<ValueSpec>().is_err());
        assert!("x".parse::<KeySpec>().is_err());
        for v in [
            "bytes",
            "packets",
            "occurrences",
            "set:dst",
            "set:dport",
            "set:ttl",
        ] {
            assert_eq!(v.parse::<ValueSpec>().unwrap().to_string(), v);
        }
        assert!(ValueSpec::SetTtl.is_set());
        assert!(!ValueSpec::Bytes.is_set());
        assert_eq!(ValueSpec::SetDport.unit(), Unit::Distinct);
    }
}
