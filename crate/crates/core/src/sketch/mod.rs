//! The four hashing-pursuit sketches.

mod boyermoore;
mod maxcount;
mod maxstable;
mod shp;

pub use boyermoore::BoyerMooreSketch;
pub use maxcount::MaxCountSketch;
pub use maxstable::{
    frechet_draw, frechet_from_uniform, hash_to_unit, MaxStableSketch, SetElement, DEFAULT_DEPTH,
};
pub use shp::{Estimator, ShpSketch};

use crate::error::{Error, Result};
use crate::keyspace::Key;
use crate::metrics::Footprint;
use crate::report::{Algorithm, HeavyHitterReport};

/// A sketch of a scalar (cash-register) signal.
pub trait ScalarSketch: Footprint + Send {
    fn algorithm(&self) -> Algorithm;
    fn update(&mut self, key: Key, v: u64) -> Result<()>;
    fn top_k(&self, k: usize) -> Result<HeavyHitterReport>;
    fn reset(&mut self);
    fn total(&self) -> u64;
}

#[inline]
pub(crate) fn add_total(total: u64, v: u64) -> Result<u64> {
    total
        .checked_add(v)
        .ok_or(Error::Overflow { total, update: v })
}

/// Index of the largest value, lowest index on ties.
#[inline]
pub(crate) fn argmax<T: PartialOrd + Copy>(values: &[T]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

pub(crate) fn mean(values: &[u64]) -> f64 {
    values.iter().map(|&v| v as f64).sum::<f64>() / values.len() as f64
}

pub(crate) fn median(values: &[u64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_unstable();
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2] as f64
    } else {
        (v[n / 2 - 1] as f64 + v[n / 2] as f64) / 2.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argmax_prefers_lowest_index() {
        assert_eq!(argmax(&[1, 3, 3, 2]), 1);
        assert_eq!(argmax(&[0, 0, 0]), 0);
        assert_eq!(argmax(&[0.5, 2.0]), 1);
    }

    #[test]
    fn overflow_is_reported() {
        assert!(add_total(u64::MAX, 1).is_err());
        assert_eq!(add_total(1, 2).unwrap(), 3);
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&[3, 1, 2]), 2.0);
        assert_eq!(median(&[4, 1, 2, 3]), 2.5);
    }
}
