//! Hash-thinned weighted MJRTY Boyer-Moore.
//!
//! The stream is split into `m` substreams by a thinning hash, and each
//! substream runs a weighted majority vote: a matching arrival adds its
//! magnitude to the balance, a mismatch subtracts it, and the arrival takes
//! over when the balance would go negative. A key holding more than half of
//! its substream's mass always ends up as that substream's candidate.
//!
//! Next to every substream sits a row of `m'` volume counters indexed by a
//! second hash; the largest of them estimates the candidate's volume.

use crate::error::{Error, Result};
use crate::keyspace::{thin_into, HashConfig, Key, PermutationParams, FORWARD_FACTOR};
use crate::metrics::{Footprint, MemoryFootprint};
use crate::report::{Algorithm, HeavyHitterReport, ReportEntry};

use super::{add_total, ScalarSketch};

#[derive(Debug, Clone, PartialEq)]
pub struct BoyerMooreSketch {
    config: HashConfig,
    params: PermutationParams,
    thin_mul: u32,
    est_mul: u32,
    cand: Vec<Option<Key>>,
    count: Vec<i64>,
    /// `m × m'`, estimator axis innermost.
    volumes: Vec<u64>,
    /// Running `max_j volumes[s][j]`; volumes never decrease, so this stays exact.
    peak: Vec<u64>,
    total: u64,
    merged: bool,
}

impl BoyerMooreSketch {
    /// `config.m` is the substream count, `config.m_prime` the estimator width.
    pub fn new(config: HashConfig, params: PermutationParams) -> Result<Self> {
        if config.m == 0 {
            return Err(Error::InvalidConfig(
                "substream count must be at least 1".into(),
            ));
        }
        config.validate_thinning(&params)?;
        if config.estimator_gamma == config.thinning_gamma {
            return Err(Error::InvalidConfig(
                "estimator power must differ from the thinning power".into(),
            ));
        }
        Ok(Self {
            config,
            params,
            thin_mul: FORWARD_FACTOR.wrapping_pow(config.thinning_gamma),
            est_mul: FORWARD_FACTOR.wrapping_pow(config.estimator_gamma),
            cand: vec![None; config.m],
            count: vec![0; config.m],
            volumes: vec![0; config.m * config.m_prime],
            peak: vec![0; config.m],
            total: 0,
            merged: false,
        })
    }

    pub fn config(&self) -> &HashConfig {
        &self.config
    }

    pub fn substream(&self, key: Key) -> usize {
        thin_into(self.params.permute(key), self.thin_mul, self.config.m)
    }

    pub fn estimator_bin(&self, key: Key) -> usize {
        thin_into(self.params.permute(key), self.est_mul, self.config.m_prime)
    }

    pub fn candidate(&self, substream: usize) -> Option<Key> {
        self.cand[substream]
    }

    pub fn balance(&self, substream: usize) -> i64 {
        self.count[substream]
    }

    pub fn volumes(&self) -> &[u64] {
        &self.volumes
    }

    /// `max_j volumes[s][j]`.
    pub fn volume_estimate(&self, substream: usize) -> u64 {
        self.peak[substream]
    }

    pub fn is_merged(&self) -> bool {
        self.merged
    }

    pub fn update(&mut self, key: Key, v: u64) -> Result<()> {
        let total = add_total(self.total, v)?;
        if total > i64::MAX as u64 {
            return Err(Error::Overflow {
                total: self.total,
                update: v,
            });
        }
        self.total = total;
        let pk = self.params.permute(key);
        let s = thin_into(pk, self.thin_mul, self.config.m);
        let j = thin_into(pk, self.est_mul, self.config.m_prime);
        let v = v as i64;

        let count = &mut self.count[s];
        match self.cand[s] {
            None => {
                self.cand[s] = Some(key);
                *count = v;
            }
            Some(c) if c == key => *count += v,
            Some(_) if *count > 0 => {
                *count -= v;
                if *count < 0 {
                    self.cand[s] = Some(key);
                    *count = -*count;
                }
            }
            // zero balance: the arrival becomes the candidate
            Some(_) => {
                self.cand[s] = Some(key);
                *count = v;
            }
        }

        let cell = &mut self.volumes[s * self.config.m_prime + j];
        *cell += v as u64;
        if *cell > self.peak[s] {
            self.peak[s] = *cell;
        }
        Ok(())
    }

    /// Candidates of the `k` substreams with the largest volume estimates.
    pub fn top_k(&self, k: usize) -> Result<HeavyHitterReport> {
        if k == 0 {
            return Err(Error::KZero);
        }
        if k > self.config.m {
            return Err(Error::KTooLarge {
                k,
                limit: self.config.m,
            });
        }
        let mut order: Vec<usize> = (0..self.config.m)
            .filter(|&s| self.cand[s].is_some())
            .collect();
        order.sort_unstable_by(|&a, &b| self.peak[b].cmp(&self.peak[a]).then(a.cmp(&b)));
        let entries = order
            .into_iter()
            .take(k)
            .map(|s| ReportEntry {
                key: self.cand[s].expect("filtered to occupied substreams"),
                estimate: self.peak[s] as f64,
            })
            .collect();
        let mut report = HeavyHitterReport::new(Algorithm::BoyerMoore, entries);
        report.zero_signal = self.total == 0;
        report.approximate = self.merged;
        Ok(report)
    }

    /// Volumes add exactly. Candidates follow a heuristic: the larger balance
    /// wins, and the balances cancel when candidates differ.
    pub fn merge(&mut self, other: &BoyerMooreSketch) -> Result<()> {
        if self.config != other.config || self.params != other.params {
            return Err(Error::Mismatch(
                "Boyer-Moore sketches need identical configuration",
            ));
        }
        let total = add_total(self.total, other.total)?;
        if total > i64::MAX as u64 {
            return Err(Error::Overflow {
                total: self.total,
                update: other.total,
            });
        }
        self.total = total;
        for (a, b) in self.volumes.iter_mut().zip(&other.volumes) {
            *a += b;
        }
        let mp = self.config.m_prime;
        for s in 0..self.config.m {
            let (ca, cb) = (self.count[s], other.count[s]);
            match (self.cand[s], other.cand[s]) {
                (_, None) => {}
                (None, Some(_)) => {
                    self.cand[s] = other.cand[s];
                    self.count[s] = cb;
                }
                (Some(a), Some(b)) if a == b => self.count[s] = ca + cb,
                (Some(_), Some(_)) => {
                    if cb > ca {
                        self.cand[s] = other.cand[s];
                    }
                    self.count[s] = (ca - cb).abs();
                }
            }
            self.peak[s] = self.volumes[s * mp..(s + 1) * mp]
                .iter()
                .copied()
                .max()
                .unwrap_or(0);
        }
        self.merged = true;
        Ok(())
    }

    pub fn merged(a: &BoyerMooreSketch, b: &BoyerMooreSketch) -> Result<BoyerMooreSketch> {
        let mut out = a.clone();
        out.merge(b)?;
        Ok(out)
    }

    pub fn reset(&mut self) {
        self.cand.fill(None);
        self.count.fill(0);
        self.volumes.fill(0);
        self.peak.fill(0);
        self.total = 0;
        self.merged = false;
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn footprint(&self) -> MemoryFootprint {
        MemoryFootprint::boyer_moore(&self.config)
    }
}

impl ScalarSketch for BoyerMooreSketch {
    fn algorithm(&self) -> Algorithm {
        Algorithm::BoyerMoore
    }
    fn update(&mut self, key: Key, v: u64) -> Result<()> {
        BoyerMooreSketch::update(self, key, v)
    }
    fn top_k(&self, k: usize) -> Result<HeavyHitterReport> {
        BoyerMooreSketch::top_k(self, k)
    }
    fn reset(&mut self) {
        BoyerMooreSketch::reset(self)
    }
    fn total(&self) -> u64 {
        self.total
    }
}

impl Footprint for BoyerMooreSketch {
    fn footprint(&self) -> MemoryFootprint {
        BoyerMooreSketch::footprint(self)
    }
}
