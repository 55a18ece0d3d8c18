//! Scoring reports against ground truth, and memory accounting.

use std::collections::HashSet;

use crate::keyspace::{HashConfig, Key};
use crate::oracle::TruthEntry;
use crate::report::HeavyHitterReport;

/// Element counts and an 8-bytes-per-cell byte estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MemoryFootprint {
    /// Counter cells (or live entries, for an oracle).
    pub counters: usize,
    /// Auxiliary slots such as candidates and balances.
    pub slots: usize,
    pub bytes: usize,
}

const CELL_BYTES: usize = 8;

impl MemoryFootprint {
    fn cells(counters: usize, slots: usize) -> Self {
        Self {
            counters,
            slots,
            bytes: (counters + slots) * CELL_BYTES,
        }
    }

    /// `q · m`.
    pub fn shp(cfg: &HashConfig) -> Self {
        Self::cells(cfg.q * cfg.m, 0)
    }

    /// `q · m · m'`.
    pub fn max_count(cfg: &HashConfig) -> Self {
        Self::cells(cfg.q * cfg.m * cfg.m_prime, 0)
    }

    /// `m · m'` volume cells plus a candidate and a balance per substream.
    pub fn boyer_moore(cfg: &HashConfig) -> Self {
        Self::cells(cfg.m * cfg.m_prime, 2 * cfg.m)
    }

    /// `q · m · L`.
    pub fn max_stable(cfg: &HashConfig, depth: usize) -> Self {
        Self::cells(cfg.q * cfg.m * depth, 0)
    }

    pub fn megabytes(&self) -> f64 {
        self.bytes as f64 / 1e6
    }
}

pub trait Footprint {
    fn footprint(&self) -> MemoryFootprint;
}

pub fn memory_footprint<T: Footprint + ?Sized>(x: &T) -> MemoryFootprint {
    x.footprint()
}

/// A reported key matched against its exact value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateCheck {
    pub key: Key,
    pub estimate: f64,
    pub truth: u64,
}

impl EstimateCheck {
    pub fn ratio(&self) -> f64 {
        self.estimate / self.truth as f64
    }

    /// `1 - |estimate/truth - 1|`, floored at 0; over- and under-estimates count alike.
    pub fn accuracy(&self) -> f64 {
        (1.0 - (self.ratio() - 1.0).abs()).max(0.0)
    }

    /// Accuracy as a whole percentage, rounded to the closest digit.
    pub fn accuracy_percent(&self) -> u32 {
        (self.accuracy() * 100.0).round() as u32
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricResult {
    /// `|reported ∩ true top-k| / k`.
    pub identification_rate: f64,
    /// The reported key set equals the true top-k set.
    pub exact_recovery: bool,
    pub estimates: Vec<EstimateCheck>,
}

impl MetricResult {
    pub fn mean_accuracy(&self) -> Option<f64> {
        if self.estimates.is_empty() {
            return None;
        }
        Some(
            self.estimates
                .iter()
                .map(EstimateCheck::accuracy)
                .sum::<f64>()
                / self.estimates.len() as f64,
        )
    }
}

/// Scores a report against the exact ranking of the same window.
///
/// Only the first `k` truth entries count. When the population is smaller
/// than `k` the rate is taken over the population instead.
pub fn score(report: &HeavyHitterReport, truth: &[TruthEntry], k: usize) -> MetricResult {
    let top = &truth[..k.min(truth.len())];
    let true_keys: HashSet<Key> = top.iter().map(|e| e.key).collect();
    let reported: HashSet<Key> = report.keys().collect();
    let hits = reported.intersection(&true_keys).count();
    let identification_rate = if top.is_empty() {
        0.0
    } else {
        hits as f64 / top.len() as f64
    };

    let mut seen = HashSet::new();
    let estimates = report
        .entries
        .iter()
        .filter(|e| seen.insert(e.key))
        .filter_map(|e| {
            top.iter().find(|t| t.key == e.key).map(|t| EstimateCheck {
                key: e.key,
                estimate: e.estimate,
                truth: t.value,
            })
        })
        .collect();

    MetricResult {
        identification_rate,
        exact_recovery: reported == true_keys,
        estimates,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::{Algorithm, ReportEntry};

    fn truth(values: &[(u32, u64)]) -> Vec<TruthEntry> {
        values
            .iter()
            .map(|&(k, v)| TruthEntry {
                key: Key(k),
                value: v,
            })
            .collect()
    }

    fn report(keys: &[(u32, f64)]) -> HeavyHitterReport {
        HeavyHitterReport::new(
            Algorithm::Shp,
            keys.iter()
                .map(|&(k, e)| ReportEntry {
                    key: Key(k),
                    estimate: e,
                })
                .collect(),
        )
    }

    #[test]
    fn perfect_report() {
        let t = truth(&[(1, 10), (2, 5)]);
        let r = score(&report(&[(1, 10.0), (2, 5.0)]), &t, 2);
        assert_eq!(r.identification_rate, 1.0);
        assert!(r.exact_recovery);
        assert_eq!(r.mean_accuracy(), Some(1.0));
    }

    #[test]
    fn half_hit() {
        let t = truth(&[(1, 40), (2, 30), (3, 20), (4, 10)]);
        let r = score(&report(&[(1, 40.0), (9, 1.0), (3, 20.0), (8, 1.0)]), &t, 4);
        assert_eq!(r.identification_rate, 0.5);
        assert!(!r.exact_recovery);
    }

    #[test]
    fn order_does_not_matter() {
        let t = truth(&[(1, 40), (2, 30)]);
        let a = score(&report(&[(1, 1.0), (2, 1.0)]), &t, 2);
        let b = score(&report(&[(2, 1.0), (1, 1.0)]), &t, 2);
        assert_eq!(a.identification_rate, b.identification_rate);
        assert!(b.exact_recovery);
    }

    #[test]
    fn table_accuracy_convention() {
        let t = truth(&[(1, 100)]);
        let r = score(&report(&[(1, 88.0)]), &t, 1);
        assert_eq!(r.estimates[0].accuracy_percent(), 88);
        let over = score(&report(&[(1, 112.0)]), &t, 1);
        assert_eq!(over.estimates[0].accuracy_percent(), 88);
        assert_eq!(
            score(&report(&[(1, 100.4)]), &t, 1).estimates[0].accuracy_percent(),
            100
        );
    }

    #[test]
    fn duplicates_are_counted_once() {
        let t = truth(&[(1, 10), (2, 5)]);
        let r = score(&report(&[(1, 10.0), (1, 3.0)]), &t, 2);
        assert_eq!(r.identification_rate, 0.5);
        assert!(!r.exact_recovery);
        assert_eq!(r.estimates.len(), 1);
    }

    #[test]
    fn table_footprints() {
        let mc = MemoryFootprint::max_count(&HashConfig::max_count());
        assert_eq!(mc.counters, 51_200);
        assert!((mc.megabytes() - 0.41).abs() < 0.01);
        let bm = MemoryFootprint::boyer_moore(&HashConfig::boyer_moore());
        assert_eq!((bm.counters, bm.slots), (65_536, 512));
        assert!((bm.megabytes() - 0.5).abs() < 0.05);
        assert_eq!(MemoryFootprint::shp(&HashConfig::default()).counters, 1024);
    }
}
