//! Recovery guarantees for exactly sparse, separated signals.
//!
//! For a `k`-sparse signal with magnitudes `L(1) > … > L(k) > 0` and tail sums
//! `L̄(i) = Σ_{j>i} L(j)`, the top `r` keys are recovered whenever the bins of
//! the top `r` collide with nothing. The product form below is the exact
//! probability of that event under uniform hashing, hence a lower bound on
//! the recovery probability.

mod montecarlo;

pub use montecarlo::{monte_carlo_validate, Metric, ValidationOutcome, ValidationSpec, Verdict};

use crate::error::{Error, Result};
use crate::keyspace::Key;

fn check_ranks(k: usize, r: usize, m: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::InvalidConfig("m must be at least 1".into()));
    }
    if r == 0 || r > k {
        return Err(Error::InvalidConfig(format!(
            "need 1 ≤ r ≤ k (got r = {r}, k = {k})"
        )));
    }
    if r > m {
        return Err(Error::InvalidConfig(format!(
            "r = {r} exceeds the bin count m = {m}"
        )));
    }
    Ok(())
}

/// `(1 - r/m)^{(k-r)q} · ∏_{i=1}^{r-1} (1 - i/m)^q`.
pub fn shp_recovery_bound(k: usize, r: usize, q: usize, m: usize) -> Result<f64> {
    check_ranks(k, r, m)?;
    let m = m as f64;
    let mut log = if k > r {
        (k - r) as f64 * q as f64 * (-(r as f64) / m).ln_1p()
    } else {
        0.0
    };
    for i in 1..r {
        log += q as f64 * (-(i as f64) / m).ln_1p();
    }
    Ok(log.exp())
}

/// `1 - q·r·(2k - r - 1) / (2m)`, a linearization of the product form. May be negative.
pub fn shp_linearized_bound(k: usize, r: usize, q: usize, m: usize) -> Result<f64> {
    check_ranks(k, r, m)?;
    Ok(1.0 - (q * r * (2 * k - r - 1)) as f64 / (2 * m) as f64)
}

/// `1 - q·r·(k - 1) / (2m)`.
///
/// Kept for comparison only: it is not implied by the product form and
/// exceeds it at small cases such as `k = 2, r = 1, q = 4, m = 256`.
pub fn shp_simplified_bound_uncertified(k: usize, r: usize, q: usize, m: usize) -> Result<f64> {
    check_ranks(k, r, m)?;
    Ok(1.0 - (q * r * (k - 1)) as f64 / (2 * m) as f64)
}

/// The simple-sketch bound with `m · m'` bins.
pub fn maxcount_recovery_bound(
    k: usize,
    r: usize,
    q: usize,
    m: usize,
    m_prime: usize,
) -> Result<f64> {
    if m_prime == 0 {
        return Err(Error::InvalidConfig("m' must be at least 1".into()));
    }
    shp_recovery_bound(k, r, q, m * m_prime)
}

/// The simple-sketch bound with a single hash over `m` substreams.
pub fn bm_recovery_bound(k: usize, r: usize, m: usize) -> Result<f64> {
    shp_recovery_bound(k, r, 1, m)
}

/// Expected identified fraction `(m/k)(1 - (1 - 1/m)^k)` for the thinned
/// majority vote when every key outweighs all lighter keys combined.
pub fn bm_identification_rate(k: usize, m: usize) -> Result<f64> {
    if k == 0 || m == 0 {
        return Err(Error::InvalidConfig("k and m must be at least 1".into()));
    }
    let (kf, mf) = (k as f64, m as f64);
    let occupied = -(kf * (-1.0 / mf).ln_1p()).exp_m1();
    Ok(mf / kf * occupied)
}

/// How the `k` magnitudes of a test signal are laid out.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MagnitudeProfile {
    /// `L(i) = 2^{k-i+1}`, so every key outweighs all lighter keys (`k ≤ 62`).
    PowersOfTwo,
    /// `L(i) = k - i + 1`: strictly ordered but not separated.
    Descending,
    Custom(Vec<u64>),
}

impl MagnitudeProfile {
    pub fn magnitudes(&self, k: usize) -> Result<Vec<u64>> {
        match self {
            MagnitudeProfile::PowersOfTwo => {
                if k > 62 {
                    return Err(Error::Premise(format!(
                        "powers-of-two magnitudes for k = {k} overflow 64-bit accumulators"
                    )));
                }
                Ok((1..=k).map(|i| 1u64 << (k - i + 1)).collect())
            }
            MagnitudeProfile::Descending => Ok((1..=k as u64).rev().collect()),
            MagnitudeProfile::Custom(v) => {
                if v.len() != k {
                    return Err(Error::Premise(format!(
                        "{} magnitudes given for k = {k}",
                        v.len()
                    )));
                }
                Ok(v.clone())
            }
        }
    }
}

/// An exactly `k`-sparse signal with strictly decreasing magnitudes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseSignal {
    keys: Vec<Key>,
    magnitudes: Vec<u64>,
}

impl SparseSignal {
    pub fn new(keys: Vec<Key>, magnitudes: Vec<u64>) -> Result<Self> {
        if keys.len() != magnitudes.len() || keys.is_empty() {
            return Err(Error::Premise("need one positive magnitude per key".into()));
        }
        let mut sorted = keys.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Premise("keys must be distinct".into()));
        }
        if magnitudes.windows(2).any(|w| w[0] <= w[1]) || magnitudes[magnitudes.len() - 1] == 0 {
            return Err(Error::Premise(
                "magnitudes must satisfy L(1) > … > L(k) > 0".into(),
            ));
        }
        magnitudes
            .iter()
            .try_fold(0u64, |acc, &v| acc.checked_add(v))
            .ok_or_else(|| Error::Premise("total magnitude overflows".into()))?;
        Ok(Self { keys, magnitudes })
    }

    pub fn k(&self) -> usize {
        self.keys.len()
    }

    pub fn keys(&self) -> &[Key] {
        &self.keys
    }

    pub fn magnitudes(&self) -> &[u64] {
        &self.magnitudes
    }

    /// `L̄(i)` for 1-based `i`; `L̄(k) = 0`.
    pub fn tail(&self, i: usize) -> u64 {
        self.magnitudes[i.min(self.k())..].iter().sum()
    }

    /// `L(r) > L̄(r)`.
    pub fn separated_at(&self, r: usize) -> bool {
        r >= 1 && r <= self.k() && self.magnitudes[r - 1] > self.tail(r)
    }

    pub fn fully_separated(&self) -> bool {
        (1..=self.k()).all(|i| self.separated_at(i))
    }

    pub fn entries(&self) -> impl Iterator<Item = (Key, u64)> + '_ {
        self.keys
            .iter()
            .copied()
            .zip(self.magnitudes.iter().copied())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EPS: f64 = 1e-5;

    #[test]
    fn shp_bound_examples() {
        assert_eq!(shp_recovery_bound(1, 1, 4, 256).unwrap(), 1.0);
        assert!((shp_recovery_bound(2, 1, 4, 256).unwrap() - 0.984_466).abs() < EPS);
        assert!((shp_recovery_bound(8, 8, 4, 256).unwrap() - 0.642_855).abs() < EPS);
        assert!(shp_recovery_bound(2, 1, 4, 0).is_err());
        assert!(shp_recovery_bound(3, 4, 4, 256).is_err());
        assert!(shp_recovery_bound(300, 257, 4, 256).is_err());
        let full = shp_recovery_bound(16, 16, 1, 16).unwrap();
        let perms = (1..=16u64).product::<u64>() as f64 / 16f64.powi(16);
        assert!((full - perms).abs() < 1e-15);
        assert_eq!(shp_recovery_bound(17, 16, 1, 16).unwrap(), 0.0);
    }

    #[test]
    fn linearized_examples() {
        assert!((shp_linearized_bound(2, 1, 4, 256).unwrap() - 0.984_375).abs() < 1e-12);
        assert_eq!(shp_linearized_bound(1, 1, 4, 256).unwrap(), 1.0);
        let (r, m) = (10usize, 365usize);
        let birthday = 1.0 - (r * (r - 1)) as f64 / (2 * m) as f64;
        assert!((shp_linearized_bound(r, r, 1, m).unwrap() - birthday).abs() < 1e-12);
        assert!(shp_linearized_bound(200, 100, 4, 256).unwrap() < 0.0);
    }

    #[test]
    fn simplified_form_exceeds_product_at_small_case() {
        let shown = shp_simplified_bound_uncertified(2, 1, 4, 256).unwrap();
        assert!(shown > shp_recovery_bound(2, 1, 4, 256).unwrap());
    }

    #[test]
    fn maxcount_examples() {
        assert!((maxcount_recovery_bound(8, 8, 4, 256, 50).unwrap() - 0.991_286).abs() < EPS);
        assert_eq!(
            maxcount_recovery_bound(8, 8, 4, 256, 1).unwrap(),
            shp_recovery_bound(8, 8, 4, 256).unwrap()
        );
        let mut last = 0.0;
        for mp in 1..60 {
            let b = maxcount_recovery_bound(8, 3, 4, 256, mp).unwrap();
            assert!(b >= last);
            last = b;
        }
    }

    #[test]
    fn bm_bound_examples() {
        assert!((bm_recovery_bound(2, 1, 256).unwrap() - 0.996_094).abs() < EPS);
        assert_eq!(bm_recovery_bound(1, 1, 256).unwrap(), 1.0);
        for (k, r) in [(2, 1), (8, 8), (20, 5)] {
            assert!(
                bm_recovery_bound(k, r, 256).unwrap() >= shp_recovery_bound(k, r, 4, 256).unwrap()
            );
        }
    }

    #[test]
    fn identification_rate_examples() {
        assert!((bm_identification_rate(1, 256).unwrap() - 1.0).abs() < 1e-12);
        assert!((bm_identification_rate(256, 256).unwrap() - 0.632_840).abs() < EPS);
        assert!((bm_identification_rate(16, 256).unwrap() - 0.971_230).abs() < EPS);
        assert!((bm_identification_rate(64, 256).unwrap() - 0.886_322).abs() < EPS);
    }

    #[test]
    fn profiles() {
        assert_eq!(
            MagnitudeProfile::PowersOfTwo.magnitudes(3).unwrap(),
            vec![8, 4, 2]
        );
        assert_eq!(
            MagnitudeProfile::Descending.magnitudes(3).unwrap(),
            vec![3, 2, 1]
        );
        assert!(MagnitudeProfile::PowersOfTwo.magnitudes(63).is_err());
        assert!(MagnitudeProfile::Custom(vec![1]).magnitudes(2).is_err());
    }

    #[test]
    fn sparse_signal_premises() {
        let keys = vec![Key(1), Key(2), Key(3)];
        let s = SparseSignal::new(keys.clone(), vec![8, 4, 2]).unwrap();
        assert_eq!(s.tail(1), 6);
        assert_eq!(s.tail(3), 0);
        assert!(s.fully_separated());
        let d = SparseSignal::new(keys.clone(), vec![3, 2, 1]).unwrap();
        assert!(!d.separated_at(1));
        assert!(d.separated_at(3));
        assert!(SparseSignal::new(keys.clone(), vec![3, 3, 1]).is_err());
        assert!(SparseSignal::new(keys, vec![3, 2, 0]).is_err());
        assert!(SparseSignal::new(vec![Key(1), Key(1)], vec![2, 1]).is_err());
    }
}
