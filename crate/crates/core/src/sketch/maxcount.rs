//! Max-count hashing pursuit: the simple sketch with an extra substream axis.
//!
//! A thinning hash of the permuted key picks one of `m'` substreams, and each
//! row keeps a separate counter per (bin, substream). Two keys only collide if
//! they share both the digit and the substream, which effectively multiplies
//! the number of bins by `m'`.

use crate::error::{Error, Result};
use crate::keyspace::{digit_at, thin_into, HashConfig, Key, PermutationParams, FORWARD_FACTOR};
use crate::metrics::{Footprint, MemoryFootprint};
use crate::report::{Algorithm, HeavyHitterReport, ReportEntry};

use super::{add_total, argmax, ScalarSketch};

#[derive(Debug, Clone, PartialEq)]
pub struct MaxCountSketch {
    config: HashConfig,
    params: PermutationParams,
    bits: u32,
    thin_mul: u32,
    /// `q × m × m'`, substream axis innermost.
    counts: Vec<u64>,
    total: u64,
}

impl MaxCountSketch {
    pub fn new(config: HashConfig, params: PermutationParams) -> Result<Self> {
        config.validate(&params)?;
        let bits = config.digit_bits()?;
        Ok(Self {
            config,
            params,
            bits,
            thin_mul: FORWARD_FACTOR.wrapping_pow(config.thinning_gamma),
            counts: vec![0; config.q * config.m * config.m_prime],
            total: 0,
        })
    }

    pub fn config(&self) -> &HashConfig {
        &self.config
    }

    pub fn params(&self) -> &PermutationParams {
        &self.params
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn cell(&self, row: usize, bin: usize, substream: usize) -> u64 {
        self.counts[self.offset(row, bin) + substream]
    }

    #[inline]
    fn offset(&self, row: usize, bin: usize) -> usize {
        (row * self.config.m + bin) * self.config.m_prime
    }

    pub fn substream(&self, key: Key) -> usize {
        thin_into(self.params.permute(key), self.thin_mul, self.config.m_prime)
    }

    /// Sums out the substream axis; equals the simple sketch's counters.
    pub fn collapse(&self) -> Vec<u64> {
        self.counts
            .chunks_exact(self.config.m_prime)
            .map(|c| c.iter().sum())
            .collect()
    }

    pub fn update(&mut self, key: Key, v: u64) -> Result<()> {
        self.total = add_total(self.total, v)?;
        let pk = self.params.permute(key);
        let s = thin_into(pk, self.thin_mul, self.config.m_prime);
        for row in 0..self.config.q {
            let at = self.offset(row, digit_at(pk, row, self.bits)) + s;
            self.counts[at] += v;
        }
        Ok(())
    }

    /// Runs the extraction rounds on a private copy, so the sketch itself is untouched.
    pub fn top_k(&self, k: usize) -> Result<HeavyHitterReport> {
        let (q, m, mp) = (self.config.q, self.config.m, self.config.m_prime);
        if k == 0 {
            return Err(Error::KZero);
        }
        let limit = q * m * mp;
        if k > limit {
            return Err(Error::KTooLarge { k, limit });
        }
        let mut cells = self.counts.clone();
        let mut peak = vec![0u64; q * m];
        let mut peak_at = vec![0usize; q * m];
        for (b, chunk) in cells.chunks_exact(mp).enumerate() {
            let l = argmax(chunk);
            peak[b] = chunk[l];
            peak_at[b] = l;
        }

        let mut entries = Vec::with_capacity(k);
        let mut digits = vec![0usize; q];
        for _ in 0..k {
            let mut sum = 0u64;
            for row in 0..q {
                let j = argmax(&peak[row * m..(row + 1) * m]);
                let b = row * m + j;
                digits[row] = j;
                sum += peak[b];
                // exclude the selected cell and refresh this bin's max
                let chunk = &mut cells[b * mp..(b + 1) * mp];
                chunk[peak_at[b]] = 0;
                let l = argmax(chunk);
                peak[b] = chunk[l];
                peak_at[b] = l;
            }
            let key = self.config.decode(&digits, &self.params)?;
            entries.push(ReportEntry {
                key,
                estimate: sum as f64 / q as f64,
            });
        }
        let mut report = HeavyHitterReport::new(Algorithm::MaxCount, entries);
        report.zero_signal = self.total == 0;
        Ok(report)
    }

    pub fn merge(&mut self, other: &MaxCountSketch) -> Result<()> {
        if self.config != other.config || self.params != other.params {
            return Err(Error::Mismatch(
                "max-count sketches need identical configuration",
            ));
        }
        self.total = add_total(self.total, other.total)?;
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        Ok(())
    }

    pub fn merged(a: &MaxCountSketch, b: &MaxCountSketch) -> Result<MaxCountSketch> {
        let mut out = a.clone();
        out.merge(b)?;
        Ok(out)
    }

    pub fn reset(&mut self) {
        self.counts.fill(0);
        self.total = 0;
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn footprint(&self) -> MemoryFootprint {
        MemoryFootprint::max_count(&self.config)
    }
}

impl ScalarSketch for MaxCountSketch {
    fn algorithm(&self) -> Algorithm {
        Algorithm::MaxCount
    }
    fn update(&mut self, key: Key, v: u64) -> Result<()> {
        MaxCountSketch::update(self, key, v)
    }
    fn top_k(&self, k: usize) -> Result<HeavyHitterReport> {
        MaxCountSketch::top_k(self, k)
    }
    fn reset(&mut self) {
        MaxCountSketch::reset(self)
    }
    fn total(&self) -> u64 {
        self.total
    }
}

impl Footprint for MaxCountSketch {
    fn footprint(&self) -> MemoryFootprint {
        MaxCountSketch::footprint(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sketch::ShpSketch;

    fn sketch() -> MaxCountSketch {
        MaxCountSketch::new(HashConfig::max_count(), PermutationParams::default()).unwrap()
    }

    #[test]
    fn single_update_same_substream() {
        let mut s = sketch();
        s.update(Key(0xC0A8_0001), 9).unwrap();
        let sub = s.substream(Key(0xC0A8_0001));
        let hot: Vec<usize> = s
            .counts()
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(i, _)| i)
            .collect();
        assert_eq!(hot.len(), 4);
        assert!(hot.iter().all(|i| i % 50 == sub));
        assert!(hot.iter().all(|&i| s.counts()[i] == 9));
    }

    #[test]
    fn collapse_matches_simple_sketch() {
        let mut mc = sketch();
        let mut shp =
            ShpSketch::new(HashConfig::max_count(), PermutationParams::default()).unwrap();
        let mut x = 12345u32;
        for i in 0..2000u64 {
            x = x.wrapping_mul(1_103_515_245).wrapping_add(12345);
            mc.update(Key(x >> 3), i % 17).unwrap();
            shp.update(Key(x >> 3), i % 17).unwrap();
        }
        assert_eq!(mc.collapse(), shp.counts());
    }

    #[test]
    fn same_digit_different_substream_do_not_collide() {
        let p = PermutationParams::default();
        let cfg = HashConfig::max_count();
        let s = sketch();
        let a = cfg.decode(&[9, 1, 2, 3], &p).unwrap();
        // search the second row digits for a partner with a different substream
        let b = (0..256)
            .map(|d| cfg.decode(&[9, d, 200, 201], &p).unwrap())
            .find(|&b| s.substream(b) != s.substream(a))
            .unwrap();
        let mut s = sketch();
        s.update(a, 10).unwrap();
        s.update(b, 20).unwrap();
        assert_eq!(s.cell(0, 9, s.substream(a)), 10);
        assert_eq!(s.cell(0, 9, s.substream(b)), 20);
        let r = s.top_k(2).unwrap();
        assert_eq!(
            r.entries[0],
            ReportEntry {
                key: b,
                estimate: 20.0
            }
        );
        assert_eq!(
            r.entries[1],
            ReportEntry {
                key: a,
                estimate: 10.0
            }
        );
    }

    #[test]
    fn single_key_then_exclusion_empties() {
        let mut s = sketch();
        s.update(Key(77), 10).unwrap();
        let r = s.top_k(2).unwrap();
        assert_eq!(
            r.entries[0],
            ReportEntry {
                key: Key(77),
                estimate: 10.0
            }
        );
        assert_eq!(r.entries[1].estimate, 0.0);
        // the query did not consume the sketch
        assert_eq!(s.top_k(2).unwrap(), r);
    }

    #[test]
    fn merge_and_reset() {
        let mut a = sketch();
        let mut b = sketch();
        let mut both = sketch();
        for (k, v) in [(1u32, 5u64), (2, 7)] {
            a.update(Key(k), v).unwrap();
            both.update(Key(k), v).unwrap();
        }
        for (k, v) in [(2u32, 3u64), (1000, 8)] {
            b.update(Key(k), v).unwrap();
            both.update(Key(k), v).unwrap();
        }
        assert_eq!(MaxCountSketch::merged(&a, &b).unwrap(), both);
        assert_eq!(
            MaxCountSketch::merged(&a, &b).unwrap().top_k(3).unwrap(),
            both.top_k(3).unwrap()
        );
        assert_eq!(MaxCountSketch::merged(&a, &sketch()).unwrap(), a);
        let other =
            MaxCountSketch::new(HashConfig::default(), PermutationParams::default()).unwrap();
        assert!(a.merge(&other).is_err());

        a.reset();
        assert_eq!(a, sketch());
        a.reset();
        assert!(a.top_k(1).unwrap().zero_signal);
        a.update(Key(4), 4).unwrap();
        let mut once = sketch();
        once.update(Key(4), 4).unwrap();
        assert_eq!(a, once);
    }

    #[test]
    fn k_limits() {
        let s = MaxCountSketch::new(
            HashConfig::max_count().with_m_prime(1),
            PermutationParams::default(),
        )
        .unwrap();
        assert!(s.top_k(0).is_err());
        assert!(s.top_k(1025).is_err());
        assert_eq!(s.top_k(300).unwrap().entries.len(), 300);
    }
}
