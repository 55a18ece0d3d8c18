//! Max-stable hashing pursuit for set-valued signals.
//!
//! Each set element seeds `L` deterministic standard 1-Fréchet draws. A cell
//! keeps the running maximum of the draws of every element routed to it, so
//! after `n` distinct elements each of its `L` slots is distributed as
//! `n · Z`. Repeated elements produce identical draws and change nothing.
//! The median of `n · Z` is `n / ln 2`, which gives the cardinality estimate.

use std::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::keyspace::{digit_at, HashConfig, Key, PermutationParams};
use crate::metrics::{Footprint, MemoryFootprint};
use crate::report::{Algorithm, HeavyHitterReport, ReportEntry};

use super::argmax;

pub const DEFAULT_DEPTH: usize = 201;
const CACHE_SLOTS: usize = 16;

/// One element of a set-valued update: a port, an address, a TTL.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SetElement(pub u32);

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Maps a 64-bit hash to the open interval (0, 1) using its top 52 bits,
/// so that the midpoint `2^52 - 1/2` of the top cell is still exact.
#[inline]
pub fn hash_to_unit(h: u64) -> f64 {
    ((h >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}

/// Inverse CDF of the standard 1-Fréchet law `P(Z ≤ x) = exp(-1/x)`.
#[inline]
pub fn frechet_from_uniform(u: f64) -> f64 {
    -1.0 / u.ln()
}

/// The `ell`-th standard 1-Fréchet draw seeded by `element` under `salt`.
#[inline]
pub fn frechet_draw(element: SetElement, ell: usize, salt: u64) -> f64 {
    let seed = mix64(salt ^ (element.0 as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    frechet_from_uniform(hash_to_unit(mix64(seed ^ ell as u64)))
}

#[derive(Debug, Clone)]
pub struct MaxStableSketch {
    config: HashConfig,
    params: PermutationParams,
    bits: u32,
    depth: usize,
    salt: u64,
    /// `q × m × L`, realization axis innermost; 0 marks an empty slot.
    cells: Vec<f64>,
    updates: u64,
    cache_tags: [Option<u32>; CACHE_SLOTS],
    cache: Vec<f64>,
}

impl PartialEq for MaxStableSketch {
    fn eq(&self, other: &Self) -> bool {
        self.config == other.config
            && self.params == other.params
            && self.depth == other.depth
            && self.salt == other.salt
            && self.cells == other.cells
    }
}

impl MaxStableSketch {
    /// `depth` is the number of Fréchet realizations per cell; it must be odd.
    pub fn new(
        config: HashConfig,
        params: PermutationParams,
        depth: usize,
        salt: u64,
    ) -> Result<Self> {
        let bits = config.digit_bits()?;
        if depth == 0 || depth.is_multiple_of(2) {
            return Err(Error::InvalidConfig(format!(
                "sketch depth L = {depth} must be odd"
            )));
        }
        Ok(Self {
            config,
            params,
            bits,
            depth,
            salt,
            cells: vec![0.0; config.q * config.m * depth],
            updates: 0,
            cache_tags: [None; CACHE_SLOTS],
            cache: vec![0.0; CACHE_SLOTS * depth],
        })
    }

    pub fn config(&self) -> &HashConfig {
        &self.config
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn salt(&self) -> u64 {
        self.salt
    }

    pub fn cells(&self) -> &[f64] {
        &self.cells
    }

    pub fn cell(&self, row: usize, bin: usize) -> &[f64] {
        let at = (row * self.config.m + bin) * self.depth;
        &self.cells[at..at + self.depth]
    }

    fn draws(&mut self, element: SetElement) -> usize {
        let slot = (mix64(element.0 as u64) as usize) % CACHE_SLOTS;
        let at = slot * self.depth;
        if self.cache_tags[slot] != Some(element.0) {
            for (ell, z) in self.cache[at..at + self.depth].iter_mut().enumerate() {
                *z = frechet_draw(element, ell, self.salt);
            }
            self.cache_tags[slot] = Some(element.0);
        }
        at
    }

    pub fn update(&mut self, key: Key, element: SetElement) {
        let at = self.draws(element);
        let pk = self.params.permute(key);
        let (m, depth) = (self.config.m, self.depth);
        for row in 0..self.config.q {
            let base = (row * m + digit_at(pk, row, self.bits)) * depth;
            let cell = &mut self.cells[base..base + depth];
            for (c, &z) in cell.iter_mut().zip(&self.cache[at..at + depth]) {
                *c = c.max(z);
            }
        }
        self.updates += 1;
    }

    fn cell_median(&self, row: usize, bin: usize, scratch: &mut Vec<f64>) -> f64 {
        let cell = self.cell(row, bin);
        if cell.iter().all(|&c| c == 0.0) {
            return 0.0;
        }
        scratch.clear();
        scratch.extend_from_slice(cell);
        let mid = self.depth / 2;
        let (_, median, _) = scratch.select_nth_unstable_by(mid, |a, b| a.total_cmp(b));
        *median
    }

    /// `q × m` matrix of per-cell medians over the realization axis.
    pub fn medians(&self) -> Vec<f64> {
        let mut scratch = Vec::with_capacity(self.depth);
        let m = self.config.m;
        (0..self.config.q * m)
            .map(|b| self.cell_median(b / m, b % m, &mut scratch))
            .collect()
    }

    /// Cardinality estimate read from the bins of an arbitrary key.
    pub fn estimate(&self, key: Key) -> f64 {
        let mut scratch = Vec::with_capacity(self.depth);
        let pk = self.params.permute(key);
        let sum: f64 = (0..self.config.q)
            .map(|row| self.cell_median(row, digit_at(pk, row, self.bits), &mut scratch))
            .sum();
        LN_2 * sum / self.config.q as f64
    }

    /// The key with the largest distinct-element set and its estimated cardinality.
    pub fn top1(&self) -> HeavyHitterReport {
        let (q, m) = (self.config.q, self.config.m);
        let medians = self.medians();
        let mut digits = vec![0usize; q];
        let mut sum = 0.0;
        for row in 0..q {
            let j = argmax(&medians[row * m..(row + 1) * m]);
            digits[row] = j;
            sum += medians[row * m + j];
        }
        let key = self
            .config
            .decode(&digits, &self.params)
            .expect("argmax digits are in range");
        let mut report = HeavyHitterReport::new(
            Algorithm::MaxStable,
            vec![ReportEntry {
                key,
                estimate: LN_2 * sum / q as f64,
            }],
        );
        report.zero_signal = self.updates == 0;
        report
    }

    pub fn merge(&mut self, other: &MaxStableSketch) -> Result<()> {
        if self.salt != other.salt {
            return Err(Error::Mismatch(
                "max-stable sketches were drawn under different salts",
            ));
        }
        if self.config != other.config || self.params != other.params || self.depth != other.depth {
            return Err(Error::Mismatch(
                "max-stable sketches need identical configuration",
            ));
        }
        for (a, &b) in self.cells.iter_mut().zip(&other.cells) {
            *a = a.max(b);
        }
        self.updates += other.updates;
        Ok(())
    }

    pub fn merged(a: &MaxStableSketch, b: &MaxStableSketch) -> Result<MaxStableSketch> {
        let mut out = a.clone();
        out.merge(b)?;
        Ok(out)
    }

    pub fn reset(&mut self) {
        self.cells.fill(0.0);
        self.updates = 0;
    }

    pub fn footprint(&self) -> MemoryFootprint {
        MemoryFootprint::max_stable(&self.config, self.depth)
    }
}

impl Footprint for MaxStableSketch {
    fn footprint(&self) -> MemoryFootprint {
        MaxStableSketch::footprint(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sketch() -> MaxStableSketch {
        MaxStableSketch::new(
            HashConfig::default(),
            PermutationParams::default(),
            DEFAULT_DEPTH,
            7,
        )
        .unwrap()
    }

    #[test]
    fn draw_is_deterministic() {
        let a = frechet_draw(SetElement(80), 3, 1);
        assert_eq!(a.to_bits(), frechet_draw(SetElement(80), 3, 1).to_bits());
        assert_ne!(a, frechet_draw(SetElement(80), 4, 1));
        assert_ne!(a, frechet_draw(SetElement(80), 3, 2));
    }

    #[test]
    fn inverse_cdf_at_half() {
        assert!((frechet_from_uniform(0.5) - 1.0 / LN_2).abs() < 1e-12);
        assert!((frechet_from_uniform(0.5) - 1.4427).abs() < 1e-4);
    }

    #[test]
    fn unit_interval_is_open() {
        for h in [0u64, 1, u64::MAX, u64::MAX - 1] {
            let u = hash_to_unit(h);
            assert!(u > 0.0 && u < 1.0);
            assert!(frechet_from_uniform(u).is_finite());
        }
    }

    #[test]
    fn duplicate_updates_change_nothing() {
        let mut s = sketch();
        s.update(Key(9), SetElement(443));
        let once = s.clone();
        s.update(Key(9), SetElement(443));
        assert_eq!(s, once);
    }

    #[test]
    fn disjoint_keys_touch_disjoint_cells() {
        let p = PermutationParams::default();
        let cfg = HashConfig::default();
        let a = cfg.decode(&[1, 2, 3, 4], &p).unwrap();
        let b = cfg.decode(&[5, 6, 7, 8], &p).unwrap();
        let mut s = sketch();
        s.update(a, SetElement(1));
        s.update(b, SetElement(2));
        for row in 0..4 {
            assert!(s.cell(row, row + 1).iter().all(|&z| z > 0.0));
            assert!(s.cell(row, row + 5).iter().all(|&z| z > 0.0));
        }
        let occupied = s
            .cells()
            .chunks(DEFAULT_DEPTH)
            .filter(|c| c[0] > 0.0)
            .count();
        assert_eq!(occupied, 8);
    }

    #[test]
    fn single_element_top1() {
        let mut s = sketch();
        s.update(Key(0xC0A8_0001), SetElement(22));
        let r = s.top1();
        assert_eq!(r.entries[0].key, Key(0xC0A8_0001));
        let est = r.entries[0].estimate;
        assert!(est > 0.6 && est < 1.6, "{est}");
    }

    #[test]
    fn empty_is_zero_signal() {
        let r = sketch().top1();
        assert!(r.zero_signal);
        assert_eq!(r.entries[0].estimate, 0.0);
    }

    #[test]
    fn merge_laws() {
        let mut a = sketch();
        let mut b = sketch();
        let mut both = sketch();
        for e in 0..30 {
            a.update(Key(1), SetElement(e));
            both.update(Key(1), SetElement(e));
        }
        for e in 20..50 {
            b.update(Key(2), SetElement(e));
            both.update(Key(2), SetElement(e));
        }
        assert_eq!(MaxStableSketch::merged(&a, &b).unwrap(), both);
        assert_eq!(MaxStableSketch::merged(&b, &a).unwrap(), both);
        assert_eq!(MaxStableSketch::merged(&a, &a).unwrap(), a);
        assert_eq!(MaxStableSketch::merged(&a, &sketch()).unwrap(), a);

        let salted = MaxStableSketch::new(
            HashConfig::default(),
            PermutationParams::default(),
            DEFAULT_DEPTH,
            8,
        )
        .unwrap();
        assert!(a.merge(&salted).is_err());
    }

    #[test]
    fn reset_behaviour() {
        let mut s = sketch();
        s.update(Key(3), SetElement(3));
        s.reset();
        assert_eq!(s, sketch());
        s.reset();
        assert!(s.top1().zero_signal);
        s.update(Key(3), SetElement(3));
        let mut once = sketch();
        once.update(Key(3), SetElement(3));
        assert_eq!(s, once);
    }

    #[test]
    fn even_depth_rejected() {
        assert!(
            MaxStableSketch::new(HashConfig::default(), PermutationParams::default(), 200, 0)
                .is_err()
        );
    }
}
