//! Analytic bounds against exact rational arithmetic and brute-force enumeration.

use hashing_pursuit::bounds::{
    bm_identification_rate, bm_recovery_bound, maxcount_recovery_bound, shp_linearized_bound,
    shp_recovery_bound,
};
use num_bigint::BigUint;

/// `∏ (m - i)^q` over `i ∈ {r repeated k - r times} ∪ {1..r-1}`, over `m^{(k-1)q}`.
fn exact_product(k: u32, r: u32, q: u32, m: u32) -> f64 {
    let mm = BigUint::from(m);
    let mut num = BigUint::from(m - r).pow((k - r) * q);
    for i in 1..r {
        num *= BigUint::from(m - i).pow(q);
    }
    let den = mm.pow((k - 1) * q);
    let scale = BigUint::from(10u32).pow(18);
    let scaled: BigUint = num * scale / den;
    scaled.to_string().parse::<f64>().unwrap() / 1e18
}

#[test]
fn product_form_matches_exact_rationals() {
    for &(k, r, q, m) in &[
        (2, 1, 4, 256),
        (8, 8, 4, 256),
        (8, 3, 4, 256),
        (20, 10, 4, 256),
        (5, 5, 1, 7),
        (30, 1, 2, 65536),
    ] {
        let got = shp_recovery_bound(k as usize, r as usize, q as usize, m as usize).unwrap();
        let want = exact_product(k, r, q, m);
        assert!(
            (got - want).abs() < 1e-12,
            "({k},{r},{q},{m}): {got} vs {want}"
        );
    }
    let want = exact_product(8, 8, 4, 256 * 50);
    assert!((maxcount_recovery_bound(8, 8, 4, 256, 50).unwrap() - want).abs() < 1e-12);
    let want = exact_product(2, 1, 1, 256);
    assert!((bm_recovery_bound(2, 1, 256).unwrap() - want).abs() < 1e-15);
}

/// Every assignment of `k` keys to `m^q` digit tuples, counting those where
/// each of the top `r` keys has a private bin in every row.
fn enumerate_recovery(k: usize, r: usize, q: usize, m: usize) -> f64 {
    let cells = m.pow(q as u32);
    let total = cells.pow(k as u32);
    let mut good = 0usize;
    let mut tuple = vec![0usize; k];
    for code in 0..total {
        let mut c = code;
        for t in tuple.iter_mut() {
            *t = c % cells;
            c /= cells;
        }
        let digit = |key: usize, row: usize| (tuple[key] / m.pow(row as u32)) % m;
        let ok = (0..r)
            .all(|i| (0..q).all(|row| (0..k).all(|j| j == i || digit(j, row) != digit(i, row))));
        good += usize::from(ok);
    }
    good as f64 / total as f64
}

#[test]
fn product_form_matches_enumeration() {
    for &(k, r, q, m) in &[
        (2, 1, 1, 4),
        (3, 1, 1, 4),
        (3, 2, 1, 4),
        (3, 3, 1, 5),
        (3, 1, 2, 3),
        (4, 2, 2, 3),
    ] {
        let got = shp_recovery_bound(k, r, q, m).unwrap();
        let want = enumerate_recovery(k, r, q, m);
        assert!(
            (got - want).abs() < 1e-12,
            "({k},{r},{q},{m}): {got} vs {want}"
        );
    }
}

#[test]
fn linearization_never_exceeds_product() {
    for k in 1..40 {
        for r in 1..=k {
            for m in [16usize, 64, 256] {
                if r > m {
                    continue;
                }
                let lin = shp_linearized_bound(k, r, 4, m).unwrap();
                let exact = shp_recovery_bound(k, r, 4, m).unwrap();
                assert!(lin <= exact + 1e-12, "({k},{r},{m})");
            }
        }
    }
}

/// Mean fraction of occupied bins over all `m^k` placements of `k` keys.
fn enumerate_occupancy(k: usize, m: usize) -> f64 {
    let total = m.pow(k as u32);
    let mut occupied = 0usize;
    for code in 0..total {
        let mut seen = vec![false; m];
        let mut c = code;
        for _ in 0..k {
            seen[c % m] = true;
            c /= m;
        }
        occupied += seen.iter().filter(|&&s| s).count();
    }
    occupied as f64 / total as f64 / k as f64
}

#[test]
fn identification_rate_matches_enumeration() {
    for &(k, m) in &[(1, 4), (2, 4), (3, 4), (5, 3), (6, 6)] {
        let got = bm_identification_rate(k, m).unwrap();
        let want = enumerate_occupancy(k, m);
        assert!((got - want).abs() < 1e-12, "({k},{m}): {got} vs {want}");
    }
}

#[test]
fn identification_rate_values() {
    for (k, exact) in [(16u32, "0.97123"), (64, "0.88632"), (256, "0.63284")] {
        let m = BigUint::from(256u32);
        // (m/k)(1 - ((m-1)/m)^k) = (m^k - (m-1)^k) / (k m^{k-1})
        let num = m.pow(k) - BigUint::from(255u32).pow(k);
        let den = BigUint::from(k) * m.pow(k - 1);
        let want = (num * BigUint::from(10u32).pow(18) / den)
            .to_string()
            .parse::<f64>()
            .unwrap()
            / 1e18;
        let got = bm_identification_rate(k as usize, 256).unwrap();
        assert!((got - want).abs() < 1e-12);
        assert_eq!(format!("{got:.5}"), exact);
    }
}
