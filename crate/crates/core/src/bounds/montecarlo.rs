use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::keyspace::{HashConfig, Key, PermutationParams};
use crate::report::Algorithm;
use crate::sketch::{BoyerMooreSketch, MaxCountSketch, ScalarSketch, ShpSketch};

use super::{
    bm_identification_rate, bm_recovery_bound, maxcount_recovery_bound, shp_recovery_bound,
    MagnitudeProfile, SparseSignal,
};

/// z-score of the two-sided 99% normal interval.
const Z99: f64 = 2.575_829_303_549;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    /// The reported top `r` are exactly the true top `r`.
    ExactRecovery { r: usize },
    /// Fraction of the `k` true keys present in a top-`k` report.
    IdentificationRate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationSpec {
    pub algorithm: Algorithm,
    pub config: HashConfig,
    pub params: PermutationParams,
    pub k: usize,
    pub metric: Metric,
    pub profile: MagnitudeProfile,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// The bound lies at or below the upper end of the interval.
    Consistent,
    /// The empirical rate is significantly below the bound.
    Violated,
    /// No analytic value exists for this algorithm and metric.
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationOutcome {
    pub bound: Option<f64>,
    pub empirical: f64,
    pub standard_error: f64,
    /// 99% normal interval around `empirical`.
    pub ci: (f64, f64),
    pub trials: usize,
    pub verdict: Verdict,
}

impl ValidationOutcome {
    /// `bound - z · sqrt(b(1-b)/n)`, the Monte-Carlo noise floor under the bound itself.
    pub fn floor(&self, z: f64) -> Option<f64> {
        self.bound
            .map(|b| b - z * (b * (1.0 - b) / self.trials as f64).sqrt())
    }
}

fn analytic(spec: &ValidationSpec) -> Result<Option<f64>> {
    let c = &spec.config;
    Ok(match (spec.algorithm, spec.metric) {
        (Algorithm::Shp, Metric::ExactRecovery { r }) => {
            Some(shp_recovery_bound(spec.k, r, c.q, c.m)?)
        }
        (Algorithm::MaxCount, Metric::ExactRecovery { r }) => {
            Some(maxcount_recovery_bound(spec.k, r, c.q, c.m, c.m_prime)?)
        }
        (Algorithm::BoyerMoore, Metric::ExactRecovery { r }) => {
            Some(bm_recovery_bound(spec.k, r, c.m)?)
        }
        (Algorithm::BoyerMoore, Metric::IdentificationRate) => {
            Some(bm_identification_rate(spec.k, c.m)?)
        }
        (Algorithm::Shp | Algorithm::MaxCount, Metric::IdentificationRate) => None,
        (a, _) => {
            return Err(Error::InvalidConfig(format!(
                "{} has no scalar recovery check",
                a.as_str()
            )));
        }
    })
}

fn build(spec: &ValidationSpec) -> Result<Box<dyn ScalarSketch>> {
    Ok(match spec.algorithm {
        Algorithm::Shp => Box::new(ShpSketch::new(spec.config, spec.params)?),
        Algorithm::MaxCount => Box::new(MaxCountSketch::new(spec.config, spec.params)?),
        Algorithm::BoyerMoore => Box::new(BoyerMooreSketch::new(spec.config, spec.params)?),
        a => {
            return Err(Error::InvalidConfig(format!(
                "{} is not a scalar sketch",
                a.as_str()
            )))
        }
    })
}

fn check_premises(spec: &ValidationSpec, magnitudes: &[u64]) -> Result<()> {
    if spec.trials == 0 {
        return Err(Error::InvalidConfig(
            "at least one trial is required".into(),
        ));
    }
    let keys = (0..spec.k as u32).map(Key).collect();
    let signal = SparseSignal::new(keys, magnitudes.to_vec())?;
    if let Metric::ExactRecovery { r } = spec.metric {
        if !signal.separated_at(r) {
            return Err(Error::Premise(format!(
                "L({r}) does not exceed the tail sum below it"
            )));
        }
    }
    Ok(())
}

fn distinct_keys(rng: &mut ChaCha8Rng, k: usize) -> Vec<Key> {
    let mut keys: Vec<Key> = Vec::with_capacity(k);
    while keys.len() < k {
        let key = Key(rng.random());
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys
}

/// One trial: a fresh random support, magnitudes in profile order, a
/// shuffled arrival order. Returns the trial's score in `[0, 1]`.
fn trial(
    spec: &ValidationSpec,
    magnitudes: &[u64],
    index: u64,
    sketch: &mut dyn ScalarSketch,
) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(index);
    let keys = distinct_keys(&mut rng, spec.k);
    let mut order: Vec<usize> = (0..spec.k).collect();
    order.shuffle(&mut rng);

    sketch.reset();
    for &i in &order {
        sketch.update(keys[i], magnitudes[i])?;
    }
    Ok(match spec.metric {
        Metric::ExactRecovery { r } => {
            let report = sketch.top_k(r)?;
            let mut got: Vec<Key> = report.keys().take(r).collect();
            let mut want = keys[..r].to_vec();
            got.sort_unstable();
            got.dedup();
            want.sort_unstable();
            f64::from(u8::from(got == want))
        }
        Metric::IdentificationRate => {
            let report = sketch.top_k(spec.k)?;
            let mut got: Vec<Key> = report.keys().filter(|key| keys.contains(key)).collect();
            got.sort_unstable();
            got.dedup();
            got.len() as f64 / spec.k as f64
        }
    })
}

#[cfg(feature = "parallel")]
fn run_trials(spec: &ValidationSpec, magnitudes: &[u64]) -> Result<Vec<f64>> {
    use rayon::prelude::*;
    (0..spec.trials as u64)
        .into_par_iter()
        .map_init(
            || build(spec),
            |sketch, t| match sketch {
                Ok(s) => trial(spec, magnitudes, t, s.as_mut()),
                Err(e) => Err(Error::InvalidConfig(e.to_string())),
            },
        )
        .collect()
}

#[cfg(not(feature = "parallel"))]
fn run_trials(spec: &ValidationSpec, magnitudes: &[u64]) -> Result<Vec<f64>> {
    let mut sketch = build(spec)?;
    (0..spec.trials as u64)
        .map(|t| trial(spec, magnitudes, t, sketch.as_mut()))
        .collect()
}

/// Runs `spec.trials` independent trials and compares the empirical rate to
/// the analytic value. Results depend only on `spec`, not on thread count.
pub fn monte_carlo_validate(spec: &ValidationSpec) -> Result<ValidationOutcome> {
    spec.config.validate(&spec.params)?;
    let bound = analytic(spec)?;
    let magnitudes = spec.profile.magnitudes(spec.k)?;
    check_premises(spec, &magnitudes)?;
    build(spec)?;

    let scores = run_trials(spec, &magnitudes)?;
    let n = scores.len() as f64;
    let empirical = scores.iter().sum::<f64>() / n;
    let var = if scores.len() > 1 {
        scores.iter().map(|s| (s - empirical).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let standard_error = (var / n).sqrt();
    let ci = (
        empirical - Z99 * standard_error,
        empirical + Z99 * standard_error,
    );
    let verdict = match bound {
        None => Verdict::Unbounded,
        Some(b) if b <= ci.1 + 1e-12 => Verdict::Consistent,
        Some(_) => Verdict::Violated,
    };
    Ok(ValidationOutcome {
        bound,
        empirical,
        standard_error,
        ci,
        trials: scores.len(),
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(algorithm: Algorithm, k: usize, metric: Metric) -> ValidationSpec {
        let config = match algorithm {
            Algorithm::MaxCount => HashConfig::max_count(),
            Algorithm::BoyerMoore => HashConfig::boyer_moore(),
            _ => HashConfig::default(),
        };
        ValidationSpec {
            algorithm,
            config,
            params: PermutationParams::default(),
            k,
            metric,
            profile: MagnitudeProfile::PowersOfTwo,
            trials: 400,
            seed: 11,
        }
    }

    #[test]
    fn one_sparse_always_recovers() {
        for a in [Algorithm::Shp, Algorithm::MaxCount, Algorithm::BoyerMoore] {
            let out = monte_carlo_validate(&spec(a, 1, Metric::ExactRecovery { r: 1 })).unwrap();
            assert_eq!(out.empirical, 1.0, "{a:?}");
            assert_eq!(out.bound, Some(1.0));
            assert_eq!(out.verdict, Verdict::Consistent);
        }
    }

    #[test]
    fn deterministic_in_seed() {
        let s = spec(Algorithm::Shp, 8, Metric::ExactRecovery { r: 8 });
        assert_eq!(
            monte_carlo_validate(&s).unwrap(),
            monte_carlo_validate(&s).unwrap()
        );
    }

    #[test]
    fn premise_violations() {
        let mut s = spec(Algorithm::Shp, 3, Metric::ExactRecovery { r: 1 });
        s.profile = MagnitudeProfile::Descending;
        assert!(matches!(monte_carlo_validate(&s), Err(Error::Premise(_))));
        s.profile = MagnitudeProfile::Custom(vec![5, 5, 1]);
        assert!(matches!(monte_carlo_validate(&s), Err(Error::Premise(_))));
        s.profile = MagnitudeProfile::PowersOfTwo;
        s.trials = 0;
        assert!(monte_carlo_validate(&s).is_err());
        let mut ms = spec(Algorithm::MaxStable, 2, Metric::ExactRecovery { r: 1 });
        ms.trials = 1;
        assert!(monte_carlo_validate(&ms).is_err());
    }

    #[test]
    fn shp_identification_has_no_bound() {
        let out =
            monte_carlo_validate(&spec(Algorithm::Shp, 4, Metric::IdentificationRate)).unwrap();
        assert_eq!(out.verdict, Verdict::Unbounded);
        assert!(out.empirical > 0.9);
    }
}
