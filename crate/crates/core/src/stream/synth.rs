//! Reproducible synthetic flow traces.
//!
//! Background sources follow a Zipf law over a clustered population: keys
//! sit in a few dozen random /16 prefixes and fill each one densely, so a
//! weak hash would show it. Host numbers inside a prefix are spread by an
//! odd-multiplier bijection with a per-prefix offset. Shared host numbers
//! would give the heaviest sources identical low octets, and a
//! multiplicative permutation carries low octets straight into the first
//! digits. Every background source
//! talks to a handful of destinations, ports and TTLs. Planted hitters are
//! interleaved by a deficit rule, so each one tracks its target share
//! closely over any long enough stretch of the trace.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Zipf};

use crate::error::{Error, Result};
use crate::keyspace::Key;
use crate::report::ElementKind;

use super::FlowRecord;

const PREFIXES: usize = 48;
const COMMON_PORTS: [u16; 8] = [80, 443, 53, 22, 25, 123, 8080, 993];
const BASE_TTLS: [u8; 3] = [64, 128, 255];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Plant {
    /// Target fraction of all bytes.
    Volume { share: f64 },
    /// Target fraction of all records, cycling through `distinct` elements.
    Scan {
        element: ElementKind,
        distinct: u32,
        share: f64,
    },
}

impl Plant {
    fn share(&self) -> f64 {
        match *self {
            Plant::Volume { share } | Plant::Scan { share, .. } => share,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantedHitter {
    pub key: Key,
    pub plant: Plant,
}

impl PlantedHitter {
    pub fn volume(key: Key, share: f64) -> Self {
        Self {
            key,
            plant: Plant::Volume { share },
        }
    }

    pub fn scan(key: Key, element: ElementKind, distinct: u32, share: f64) -> Self {
        Self {
            key,
            plant: Plant::Scan {
                element,
                distinct,
                share,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub n_records: usize,
    pub zipf_exponent: f64,
    pub population: usize,
    pub planted: Vec<PlantedHitter>,
    pub seed: u64,
    pub start_ts: f64,
    pub records_per_second: f64,
    pub with_ttl: bool,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            n_records: 100_000,
            zipf_exponent: 1.1,
            population: 50_000,
            planted: Vec::new(),
            seed: 1,
            start_ts: 1_700_000_000.0,
            records_per_second: 10_000.0,
            with_ttl: true,
        }
    }
}

impl SyntheticConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population == 0 || self.population > PREFIXES << 16 {
            return Err(Error::InvalidConfig(format!(
                "population must be in 1..={} (got {})",
                PREFIXES << 16,
                self.population
            )));
        }
        if !(self.zipf_exponent > 0.0 && self.zipf_exponent.is_finite()) {
            return Err(Error::InvalidConfig(
                "zipf exponent must be positive".into(),
            ));
        }
        if self.records_per_second.is_nan() || self.records_per_second <= 0.0 {
            return Err(Error::InvalidConfig("record rate must be positive".into()));
        }
        let mut sum = 0.0;
        for p in &self.planted {
            let s = p.plant.share();
            if !(s > 0.0 && s < 1.0) {
                return Err(Error::InvalidConfig(format!(
                    "planted share {s} for {} is outside (0, 1)",
                    p.key
                )));
            }
            if let Plant::Scan {
                element, distinct, ..
            } = p.plant
            {
                let limit = match element {
                    ElementKind::Dst => u32::MAX,
                    ElementKind::Dport => 1 << 16,
                    ElementKind::Ttl => 1 << 8,
                };
                if distinct == 0 || distinct > limit {
                    return Err(Error::InvalidConfig(format!(
                        "{distinct} distinct elements do not fit the element type"
                    )));
                }
            }
            sum += s;
        }
        if sum >= 1.0 {
            return Err(Error::InvalidConfig(format!(
                "planted shares sum to {sum}, which leaves no background"
            )));
        }
        let mut keys: Vec<Key> = self.planted.iter().map(|p| p.key).collect();
        keys.sort_unstable();
        if keys.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidConfig("planted keys must be distinct".into()));
        }
        Ok(())
    }
}

#[inline]
fn mix(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Streaming generator; see [`generate`].
#[derive(Debug, Clone)]
pub struct Generator {
    cfg: SyntheticConfig,
    rng: ChaCha8Rng,
    zipf: Zipf<f64>,
    prefixes: [u32; PREFIXES],
    emitted: usize,
    total_bytes: u64,
    planted_bytes: Vec<u64>,
    planted_records: Vec<u64>,
}

/// Reproducible stream of `cfg.n_records` records; infeasible configs are rejected.
pub fn generate(cfg: &SyntheticConfig) -> Result<Generator> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut prefixes = [0u32; PREFIXES];
    for i in 0..PREFIXES {
        loop {
            let cand = rng.random::<u16>() as u32;
            if !prefixes[..i].contains(&cand) {
                prefixes[i] = cand;
                break;
            }
        }
    }
    let zipf = Zipf::new(cfg.population as f64, cfg.zipf_exponent)
        .map_err(|e| Error::InvalidConfig(format!("zipf: {e}")))?;
    Ok(Generator {
        planted_bytes: vec![0; cfg.planted.len()],
        planted_records: vec![0; cfg.planted.len()],
        cfg: cfg.clone(),
        rng,
        zipf,
        prefixes,
        emitted: 0,
        total_bytes: 0,
    })
}

impl Generator {
    /// The background source of Zipf rank `rank` (0-based).
    pub fn background_key(&self, rank: usize) -> Key {
        let prefix = self.prefixes[rank % PREFIXES];
        let offset = mix(prefix as u64) as u16;
        let host = ((rank / PREFIXES) as u16)
            .wrapping_mul(0x9e37)
            .wrapping_add(offset);
        Key(prefix << 16 | host as u32)
    }

    fn flow_size(&mut self) -> (u64, u64) {
        let packets = 1 + (self.rng.random::<f64>().powi(3) * 30.0) as u64;
        let per_packet = self.rng.random_range(40..=1500u64);
        (packets, packets * per_packet)
    }

    fn ts(&self) -> f64 {
        let t = self.cfg.start_ts + self.emitted as f64 / self.cfg.records_per_second;
        (t * 1e3).round() / 1e3
    }

    fn record(
        &mut self,
        src: Key,
        dst: Key,
        dport: u16,
        ttl: u8,
        packets: u64,
        bytes: u64,
    ) -> FlowRecord {
        FlowRecord {
            ts: self.ts(),
            src,
            dst,
            sport: self.rng.random_range(1024..=65535),
            dport,
            proto: if dport == 53 || dport == 123 { 17 } else { 6 },
            packets,
            bytes,
            ttl: self.cfg.with_ttl.then_some(ttl),
        }
    }

    /// Index of the planted hitter furthest behind its target, if any is behind.
    fn most_behind(&self) -> Option<usize> {
        let n = (self.emitted + 1) as f64;
        let mut best: Option<(usize, f64)> = None;
        for (i, p) in self.cfg.planted.iter().enumerate() {
            let deficit = match p.plant {
                Plant::Volume { share } => {
                    (share * self.total_bytes as f64 - self.planted_bytes[i] as f64)
                        / (1.0 + self.total_bytes as f64)
                }
                Plant::Scan { share, .. } => (share * n - self.planted_records[i] as f64) / n,
            };
            if deficit > 0.0 && best.is_none_or(|(_, d)| deficit > d) {
                best = Some((i, deficit));
            }
        }
        best.map(|(i, _)| i)
    }

    fn planted(&mut self, i: usize) -> FlowRecord {
        let p = self.cfg.planted[i];
        let h = mix(p.key.0 as u64);
        let count = self.planted_records[i];
        let r = match p.plant {
            Plant::Volume { .. } => {
                let (packets, bytes) = self.flow_size();
                let dst = Key(mix(h ^ (count % 4)) as u32);
                self.record(
                    p.key,
                    dst,
                    COMMON_PORTS[(h % 2) as usize],
                    60,
                    packets,
                    bytes,
                )
            }
            Plant::Scan {
                element, distinct, ..
            } => {
                let idx = (count % distinct as u64) as u32;
                let base_dst = Key(mix(h) as u32);
                let packets = 1;
                let bytes = self.rng.random_range(40..=60);
                match element {
                    ElementKind::Dst => self.record(
                        p.key,
                        Key(base_dst.0.wrapping_add(idx)),
                        445,
                        50,
                        packets,
                        bytes,
                    ),
                    ElementKind::Dport => {
                        self.record(p.key, base_dst, idx as u16, 50, packets, bytes)
                    }
                    ElementKind::Ttl => self.record(p.key, base_dst, 80, idx as u8, packets, bytes),
                }
            }
        };
        self.planted_bytes[i] += r.bytes;
        self.planted_records[i] += 1;
        r
    }

    fn background(&mut self) -> FlowRecord {
        let rank = self.zipf.sample(&mut self.rng) as usize - 1;
        let src = self.background_key(rank);
        let h = mix(src.0 as u64 ^ self.cfg.seed.rotate_left(17));
        // each source owns a few destinations, ports and hop counts
        let fan = 1 + h % 8;
        let j = self.rng.random_range(0..fan);
        let dst = Key(mix(h ^ j) as u32);
        let dport = COMMON_PORTS[((h >> 8).wrapping_add(j) % COMMON_PORTS.len() as u64) as usize];
        let ttl = BASE_TTLS[((h >> 16) % 3) as usize] - ((h >> 20) % 20) as u8 - (j % 2) as u8;
        let (packets, bytes) = self.flow_size();
        self.record(src, dst, dport, ttl, packets, bytes)
    }
}

impl Iterator for Generator {
    type Item = FlowRecord;

    fn next(&mut self) -> Option<FlowRecord> {
        if self.emitted >= self.cfg.n_records {
            return None;
        }
        let r = match self.most_behind() {
            Some(i) => self.planted(i),
            None => self.background(),
        };
        self.total_bytes += r.bytes;
        self.emitted += 1;
        Some(r)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = self.cfg.n_records - self.emitted;
        (left, Some(left))
    }
}

impl ExactSizeIterator for Generator {}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{ScalarTruth, SetTruth};

    fn cfg(planted: Vec<PlantedHitter>) -> SyntheticConfig {
        SyntheticConfig {
            n_records: 20_000,
            planted,
            ..Default::default()
        }
    }

    #[test]
    fn planted_volume_share() {
        let k = Key::from_octets(203, 0, 113, 9);
        let mut truth = ScalarTruth::new();
        for r in generate(&cfg(vec![PlantedHitter::volume(k, 0.6)])).unwrap() {
            truth.update(r.src, r.bytes);
        }
        let share = truth.get(k) as f64 / truth.total() as f64;
        assert!((0.59..=0.61).contains(&share), "{share}");
    }

    #[test]
    fn planted_scan_covers_its_set() {
        let k = Key::from_octets(198, 51, 100, 7);
        let mut truth = SetTruth::new();
        for r in generate(&cfg(vec![PlantedHitter::scan(
            k,
            ElementKind::Dport,
            300,
            0.05,
        )]))
        .unwrap()
        {
            truth.update(r.src, r.dport.into());
        }
        assert_eq!(truth.cardinality(k), 300);
        assert_eq!(truth.top_k(1)[0].key, k);
    }

    #[test]
    fn deterministic_and_sized() {
        let c = cfg(vec![PlantedHitter::volume(Key(5), 0.2)]);
        let a: Vec<_> = generate(&c).unwrap().collect();
        let b: Vec<_> = generate(&c).unwrap().collect();
        assert_eq!(a.len(), 20_000);
        assert_eq!(a, b);
        let mut other = c.clone();
        other.seed = 2;
        assert_ne!(a, generate(&other).unwrap().collect::<Vec<_>>());
    }

    #[test]
    fn pure_background() {
        let recs: Vec<_> = generate(&cfg(vec![])).unwrap().collect();
        assert!(recs.iter().all(|r| r.packets >= 1 && r.ttl.is_some()));
        let gen = generate(&cfg(vec![])).unwrap();
        let population: Vec<Key> = (0..50_000).map(|r| gen.background_key(r)).collect();
        let mut sorted = population.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), population.len());
        assert!(recs.iter().all(|r| sorted.binary_search(&r.src).is_ok()));
    }

    #[test]
    fn infeasible_configs() {
        let bad = |p| generate(&cfg(p)).is_err();
        assert!(bad(vec![
            PlantedHitter::volume(Key(1), 0.6),
            PlantedHitter::volume(Key(2), 0.4)
        ]));
        assert!(bad(vec![PlantedHitter::volume(Key(1), 0.0)]));
        assert!(bad(vec![
            PlantedHitter::volume(Key(1), 0.1),
            PlantedHitter::volume(Key(1), 0.1)
        ]));
        assert!(bad(vec![PlantedHitter::scan(
            Key(1),
            ElementKind::Ttl,
            257,
            0.1
        )]));
        assert!(generate(&SyntheticConfig {
            population: 0,
            ..Default::default()
        })
        .is_err());
    }
}
