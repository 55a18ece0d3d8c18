//! One window's worth of sketches plus the exact oracle.

use hashing_pursuit::oracle::{ScalarTruth, SetTruth, TruthEntry};
use hashing_pursuit::sketch::{BoyerMooreSketch, MaxCountSketch, MaxStableSketch, ShpSketch};
use hashing_pursuit::stream::{Extractor, FlowRecord, Update};
use hashing_pursuit::{Algorithm, Footprint, HeavyHitterReport, MemoryFootprint, ReportEntry};

use crate::config::RunConfig;
use crate::error::CliResult;

enum Slot {
    Shp(ShpSketch),
    MaxCount(MaxCountSketch),
    BoyerMoore(BoyerMooreSketch),
    MaxStable(MaxStableSketch),
}

impl Slot {
    fn footprint(&self) -> MemoryFootprint {
        match self {
            Slot::Shp(s) => s.footprint(),
            Slot::MaxCount(s) => s.footprint(),
            Slot::BoyerMoore(s) => s.footprint(),
            Slot::MaxStable(s) => s.footprint(),
        }
    }
}

enum Truth {
    Scalar(ScalarTruth),
    Set(SetTruth),
}

/// Sketches are built once and reset at every window boundary.
pub struct Engine {
    algorithms: Vec<Algorithm>,
    slots: Vec<(Algorithm, Slot)>,
    truth: Option<Truth>,
    extractor: Extractor,
}

impl Engine {
    /// The oracle is kept when `exact` is selected or `with_truth` is set.
    pub fn new(cfg: &RunConfig, with_truth: bool) -> CliResult<Self> {
        let params = cfg.params()?;
        let mut slots = Vec::new();
        for &a in &cfg.algorithms {
            let slot = match a {
                Algorithm::Shp => Slot::Shp(ShpSketch::new(cfg.shp_config(), params)?),
                Algorithm::MaxCount => {
                    Slot::MaxCount(MaxCountSketch::new(cfg.maxcount_config(), params)?)
                }
                Algorithm::BoyerMoore => {
                    Slot::BoyerMoore(BoyerMooreSketch::new(cfg.bm_config(), params)?)
                }
                Algorithm::MaxStable => Slot::MaxStable(MaxStableSketch::new(
                    cfg.shp_config(),
                    params,
                    cfg.depth,
                    cfg.seed,
                )?),
                Algorithm::Exact => continue,
            };
            slots.push((a, slot));
        }
        let truth = (with_truth || cfg.algorithms.contains(&Algorithm::Exact)).then(|| {
            if cfg.signal.value.is_set() {
                Truth::Set(SetTruth::new())
            } else {
                Truth::Scalar(ScalarTruth::new())
            }
        });
        Ok(Self {
            algorithms: cfg.algorithms.clone(),
            slots,
            truth,
            extractor: Extractor::new(cfg.signal),
        })
    }

    pub fn algorithms(&self) -> &[Algorithm] {
        &self.algorithms
    }

    /// Records skipped so far for lacking the field the value spec reads.
    pub fn skipped(&self) -> u64 {
        self.extractor.skipped()
    }

    pub fn ingest(&mut self, r: &FlowRecord) -> CliResult<()> {
        let Some((key, update)) = self.extractor.extract(r) else {
            return Ok(());
        };
        match update {
            Update::Scalar(v) => {
                for (_, slot) in &mut self.slots {
                    match slot {
                        Slot::Shp(s) => s.update(key, v)?,
                        Slot::MaxCount(s) => s.update(key, v)?,
                        Slot::BoyerMoore(s) => s.update(key, v)?,
                        Slot::MaxStable(_) => {}
                    }
                }
                if let Some(Truth::Scalar(t)) = &mut self.truth {
                    t.update(key, v);
                }
            }
            Update::Element(e) => {
                for (_, slot) in &mut self.slots {
                    if let Slot::MaxStable(s) = slot {
                        s.update(key, e);
                    }
                }
                if let Some(Truth::Set(t)) = &mut self.truth {
                    t.update(key, e.0);
                }
            }
        }
        Ok(())
    }

    pub fn reset(&mut self) {
        for (_, slot) in &mut self.slots {
            match slot {
                Slot::Shp(s) => s.reset(),
                Slot::MaxCount(s) => s.reset(),
                Slot::BoyerMoore(s) => s.reset(),
                Slot::MaxStable(s) => s.reset(),
            }
        }
        match &mut self.truth {
            Some(Truth::Scalar(t)) => t.reset(),
            Some(Truth::Set(t)) => t.reset(),
            None => {}
        }
    }

    /// Exact top `k`, empty without an oracle.
    pub fn truth(&self, k: usize) -> Vec<TruthEntry> {
        match &self.truth {
            Some(Truth::Scalar(t)) => t.top_k(k),
            Some(Truth::Set(t)) => t.top_k(k),
            None => Vec::new(),
        }
    }

    pub fn oracle_footprint(&self) -> MemoryFootprint {
        match &self.truth {
            Some(Truth::Scalar(t)) => t.footprint(),
            Some(Truth::Set(t)) => t.footprint(),
            None => MemoryFootprint::default(),
        }
    }

    pub fn footprint(&self, a: Algorithm) -> MemoryFootprint {
        if a == Algorithm::Exact {
            return self.oracle_footprint();
        }
        self.slots
            .iter()
            .find(|(b, _)| *b == a)
            .map(|(_, s)| s.footprint())
            .unwrap_or_default()
    }

    /// The report of `a` for `k`; max-stable always reports its single top key.
    pub fn report(&self, a: Algorithm, k: usize) -> CliResult<HeavyHitterReport> {
        if a == Algorithm::Exact {
            let top = self.truth(k);
            let entries = top
                .iter()
                .map(|t| ReportEntry {
                    key: t.key,
                    estimate: t.value as f64,
                })
                .collect();
            let mut r = HeavyHitterReport::new(Algorithm::Exact, entries);
            r.zero_signal = top.is_empty();
            return Ok(r);
        }
        let slot = &self
            .slots
            .iter()
            .find(|(b, _)| *b == a)
            .expect("algorithm was configured")
            .1;
        Ok(match slot {
            Slot::Shp(s) => s.top_k(k)?,
            Slot::MaxCount(s) => s.top_k(k)?,
            Slot::BoyerMoore(s) => s.top_k(k)?,
            Slot::MaxStable(s) => s.top1(),
        })
    }
}
