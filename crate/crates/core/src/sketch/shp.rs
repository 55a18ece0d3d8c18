//! Simple hashing pursuit: one counter row per digit of the permuted key.
//!
//! Every update adds its magnitude to one bin in each of the `q` rows. A
//! heavy key dominates its bin in every row, so the per-row argmax bins are
//! the digits of its permuted value. For `k > 1`, round `r` takes the `r`-th
//! largest bin of each row (earlier picks are excluded). When two heavy keys
//! share a digit the rounds can assemble phantom keys; that is inherent to
//! the method and left to the metrics to score.

use crate::error::{Error, Result};
use crate::keyspace::{digit_at, HashConfig, Key, PermutationParams};
use crate::metrics::{Footprint, MemoryFootprint};
use crate::report::{Algorithm, HeavyHitterReport, ReportEntry};

use super::{add_total, mean, median, ScalarSketch};

/// How the per-row bin values of a reported key combine into one estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Estimator {
    #[default]
    Mean,
    Median,
}

impl Estimator {
    pub(crate) fn apply(self, values: &[u64]) -> f64 {
        match self {
            Estimator::Mean => mean(values),
            Estimator::Median => median(values),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShpSketch {
    config: HashConfig,
    params: PermutationParams,
    bits: u32,
    /// Row-major `q × m`.
    counts: Vec<u64>,
    total: u64,
}

impl ShpSketch {
    pub fn new(config: HashConfig, params: PermutationParams) -> Result<Self> {
        let bits = config.digit_bits()?;
        Ok(Self {
            config,
            params,
            bits,
            counts: vec![0; config.q * config.m],
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

    /// Counters of row `row` (0-based).
    pub fn row(&self, row: usize) -> &[u64] {
        &self.counts[row * self.config.m..(row + 1) * self.config.m]
    }

    pub fn update(&mut self, key: Key, v: u64) -> Result<()> {
        // Row sums equal the total, so no cell can overflow if the total does not.
        self.total = add_total(self.total, v)?;
        let pk = self.params.permute(key);
        let m = self.config.m;
        for row in 0..self.config.q {
            self.counts[row * m + digit_at(pk, row, self.bits)] += v;
        }
        Ok(())
    }

    pub fn top_k(&self, k: usize) -> Result<HeavyHitterReport> {
        self.top_k_with(k, Estimator::Mean)
    }

    pub fn top_k_with(&self, k: usize, estimator: Estimator) -> Result<HeavyHitterReport> {
        let (q, m) = (self.config.q, self.config.m);
        if k == 0 {
            return Err(Error::KZero);
        }
        if k > m {
            return Err(Error::KTooLarge { k, limit: m });
        }
        // Excluding previous picks and taking the argmax is the same as
        // walking each row in (value desc, index asc) order.
        let orders: Vec<Vec<usize>> = (0..q)
            .map(|row| {
                let values = self.row(row);
                let mut idx: Vec<usize> = (0..m).collect();
                let by_rank = |&a: &usize, &b: &usize| values[b].cmp(&values[a]).then(a.cmp(&b));
                if k < m {
                    idx.select_nth_unstable_by(k - 1, by_rank);
                    idx.truncate(k);
                }
                idx.sort_unstable_by(by_rank);
                idx
            })
            .collect();

        let mut entries = Vec::with_capacity(k);
        let mut digits = vec![0usize; q];
        let mut values = vec![0u64; q];
        for round in 0..k {
            for row in 0..q {
                digits[row] = orders[row][round];
                values[row] = self.counts[row * m + digits[row]];
            }
            let key = self.config.decode(&digits, &self.params)?;
            entries.push(ReportEntry {
                key,
                estimate: estimator.apply(&values),
            });
        }
        let mut report = HeavyHitterReport::new(Algorithm::Shp, entries);
        report.zero_signal = self.total == 0;
        Ok(report)
    }

    pub fn merge(&mut self, other: &ShpSketch) -> Result<()> {
        if self.config != other.config || self.params != other.params {
            return Err(Error::Mismatch(
                "simple sketches need identical configuration",
            ));
        }
        self.total = add_total(self.total, other.total)?;
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        Ok(())
    }

    pub fn merged(a: &ShpSketch, b: &ShpSketch) -> Result<ShpSketch> {
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
        MemoryFootprint::shp(&self.config)
    }
}

impl ScalarSketch for ShpSketch {
    fn algorithm(&self) -> Algorithm {
        Algorithm::Shp
    }
    fn update(&mut self, key: Key, v: u64) -> Result<()> {
        ShpSketch::update(self, key, v)
    }
    fn top_k(&self, k: usize) -> Result<HeavyHitterReport> {
        ShpSketch::top_k(self, k)
    }
    fn reset(&mut self) {
        ShpSketch::reset(self)
    }
    fn total(&self) -> u64 {
        self.total
    }
}

impl Footprint for ShpSketch {
    fn footprint(&self) -> MemoryFootprint {
        ShpSketch::footprint(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::keyspace::make_params;

    fn sketch() -> ShpSketch {
        ShpSketch::new(HashConfig::default(), PermutationParams::default()).unwrap()
    }

    #[test]
    fn single_update_touches_q_cells() {
        let mut s = sketch();
        s.update(Key(5), 10).unwrap();
        assert_eq!(s.counts().iter().filter(|&&c| c == 10).count(), 4);
        assert_eq!(s.counts().iter().filter(|&&c| c != 0).count(), 4);
    }

    #[test]
    fn updates_are_additive() {
        let mut s = sketch();
        s.update(Key(5), 3).unwrap();
        s.update(Key(5), 4).unwrap();
        assert_eq!(s.counts().iter().filter(|&&c| c == 7).count(), 4);
        assert_eq!(s.total(), 7);
    }

    #[test]
    fn collision_in_first_row_only() {
        let p = PermutationParams::default();
        let cfg = HashConfig::default();
        let a = cfg.decode(&[7, 1, 2, 3], &p).unwrap();
        let b = cfg.decode(&[7, 4, 5, 6], &p).unwrap();
        let mut s = sketch();
        s.update(a, 10).unwrap();
        s.update(b, 20).unwrap();
        assert_eq!(s.row(0)[7], 30);
        assert_eq!(s.row(1)[1], 10);
        assert_eq!(s.row(1)[4], 20);
        assert_eq!(s.row(3)[3], 10);
        assert_eq!(s.row(3)[6], 20);
    }

    #[test]
    fn top1_single_key() {
        let mut s = sketch();
        s.update(Key(7), 10).unwrap();
        let r = s.top_k(1).unwrap();
        assert_eq!(
            r.entries,
            vec![ReportEntry {
                key: Key(7),
                estimate: 10.0
            }]
        );
        assert!(!r.zero_signal);
    }

    #[test]
    fn empty_sketch_is_zero_signal() {
        let r = sketch().top_k(1).unwrap();
        assert!(r.zero_signal);
        assert_eq!(r.entries[0].key, Key(0));
        assert_eq!(r.entries[0].estimate, 0.0);
    }

    #[test]
    fn two_sparse_exact() {
        let p = PermutationParams::default();
        let cfg = HashConfig::default();
        let a = Key(0x0A00_0001);
        let b = Key(0x0A00_0002);
        // brute-force check that the pair shares no digit
        let (da, db) = (
            cfg.digits(p.permute(a)).unwrap(),
            cfg.digits(p.permute(b)).unwrap(),
        );
        assert!(da.iter().zip(&db).all(|(x, y)| x != y));
        let mut s = sketch();
        s.update(a, 100).unwrap();
        s.update(b, 60).unwrap();
        let r = s.top_k(2).unwrap();
        assert_eq!(
            r.entries[0],
            ReportEntry {
                key: a,
                estimate: 100.0
            }
        );
        assert_eq!(
            r.entries[1],
            ReportEntry {
                key: b,
                estimate: 60.0
            }
        );
    }

    #[test]
    fn k_limits() {
        let s = sketch();
        assert!(matches!(s.top_k(0), Err(Error::KZero)));
        assert!(matches!(s.top_k(257), Err(Error::KTooLarge { .. })));
        assert_eq!(s.top_k(256).unwrap().entries.len(), 256);
    }

    #[test]
    fn median_estimator() {
        let p = PermutationParams::default();
        let cfg = HashConfig::default();
        let a = cfg.decode(&[7, 1, 2, 3], &p).unwrap();
        let b = cfg.decode(&[7, 4, 5, 6], &p).unwrap();
        let mut s = sketch();
        s.update(a, 10).unwrap();
        s.update(b, 5).unwrap();
        let r = s.top_k_with(1, Estimator::Median).unwrap();
        assert_eq!(r.entries[0].key, a);
        assert_eq!(r.entries[0].estimate, 10.0);
        assert_eq!(s.top_k(1).unwrap().entries[0].estimate, 11.25);
    }

    #[test]
    fn merge_rules() {
        let mut a = sketch();
        let mut b = sketch();
        let mut both = sketch();
        for (k, v) in [(1u32, 5u64), (2, 7), (99, 1)] {
            a.update(Key(k), v).unwrap();
            both.update(Key(k), v).unwrap();
        }
        for (k, v) in [(2u32, 3u64), (1000, 8)] {
            b.update(Key(k), v).unwrap();
            both.update(Key(k), v).unwrap();
        }
        let m = ShpSketch::merged(&a, &b).unwrap();
        assert_eq!(m, both);
        assert_eq!(m.top_k(3).unwrap(), both.top_k(3).unwrap());
        assert_eq!(ShpSketch::merged(&a, &sketch()).unwrap(), a);

        let other = ShpSketch::new(HashConfig::default(), make_params(5).unwrap()).unwrap();
        assert!(a.merge(&other).is_err());
    }

    #[test]
    fn reset_behaviour() {
        let mut s = sketch();
        s.update(Key(3), 4).unwrap();
        s.reset();
        assert!(s.top_k(1).unwrap().zero_signal);
        s.reset();
        assert_eq!(s, sketch());
        s.update(Key(3), 4).unwrap();
        let mut once = sketch();
        once.update(Key(3), 4).unwrap();
        assert_eq!(s, once);
    }

    #[test]
    fn overflow_is_an_error_and_leaves_state() {
        let mut s = sketch();
        s.update(Key(1), u64::MAX).unwrap();
        let before = s.clone();
        assert!(matches!(s.update(Key(2), 1), Err(Error::Overflow { .. })));
        assert_eq!(s, before);
    }
}
