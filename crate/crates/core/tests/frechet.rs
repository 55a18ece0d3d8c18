use std::f64::consts::LN_2;

use hashing_pursuit::keyspace::{HashConfig, Key, PermutationParams};
use hashing_pursuit::sketch::{frechet_draw, MaxStableSketch, SetElement, DEFAULT_DEPTH};
use statrs::distribution::{Beta, ContinuousCDF};

fn frechet_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp()
    }
}

/// Kolmogorov-Smirnov distance between a sample and a continuous CDF.
fn ks_distance(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// 1% critical value of the KS statistic, large-sample form.
fn ks_critical(n: usize) -> f64 {
    1.628 / (n as f64).sqrt()
}

#[test]
fn draws_follow_standard_frechet_across_realizations() {
    let n = 20_000;
    let xs: Vec<f64> = (0..n)
        .map(|ell| frechet_draw(SetElement(4242), ell, 5))
        .collect();
    let d = ks_distance(xs, frechet_cdf);
    assert!(d < ks_critical(n), "D = {d}");
}

#[test]
fn draws_follow_standard_frechet_across_elements() {
    let n = 20_000;
    let xs: Vec<f64> = (0..n as u32)
        .map(|e| frechet_draw(SetElement(e), 17, 5))
        .collect();
    let d = ks_distance(xs, frechet_cdf);
    assert!(d < ks_critical(n), "D = {d}");
}

#[test]
fn scaled_maximum_is_standard_frechet() {
    // max of n standard Fréchet draws has the law of n · Z
    let (n, reps) = (40u32, 5_000usize);
    let xs: Vec<f64> = (0..reps)
        .map(|ell| {
            (0..n)
                .map(|e| frechet_draw(SetElement(e), ell, 9))
                .fold(0.0, f64::max)
                / n as f64
        })
        .collect();
    let d = ks_distance(xs, frechet_cdf);
    assert!(d < ks_critical(reps), "D = {d}");
}

/// With no collisions every row holds the same `L` maxima, so the estimate
/// over `n` equals `ln 2 / (-ln U)`, where `U` is the middle order statistic
/// of `L` uniforms, i.e. `Beta((L+1)/2, (L+1)/2)`.
fn ratio_quantile(p: f64, depth: usize) -> f64 {
    let a = (depth + 1) as f64 / 2.0;
    let u = Beta::new(a, a).unwrap().inverse_cdf(p);
    LN_2 / -u.ln()
}

#[test]
fn estimator_spread_matches_order_statistic_law() {
    let trials = 400;
    let n = 200u32;
    let (lo, hi) = (
        ratio_quantile(0.05, DEFAULT_DEPTH),
        ratio_quantile(0.95, DEFAULT_DEPTH),
    );
    let mut inside = 0;
    for t in 0..trials {
        let mut s = MaxStableSketch::new(
            HashConfig::default(),
            PermutationParams::default(),
            DEFAULT_DEPTH,
            t,
        )
        .unwrap();
        for e in 0..n {
            s.update(Key(77), SetElement(e));
        }
        let ratio = s.estimate(Key(77)) / n as f64;
        inside += usize::from(ratio >= lo && ratio <= hi);
    }
    let frac = inside as f64 / trials as f64;
    // 90% nominal; 3 binomial standard errors at 400 trials is 0.045
    assert!((frac - 0.90).abs() < 0.045, "coverage {frac}");
}

#[test]
fn median_centre_is_one() {
    assert!((ratio_quantile(0.5, DEFAULT_DEPTH) - 1.0).abs() < 0.01);
    assert!(ratio_quantile(0.05, DEFAULT_DEPTH) < 0.9);
    assert!(ratio_quantile(0.95, DEFAULT_DEPTH) > 1.1);
}
