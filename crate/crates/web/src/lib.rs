//! Browser bindings: octet histograms of a permuted block, bound curves,
//! and a small synthetic run of the scalar sketches. Every call returns a
//! JSON string for the page to parse.

use hashing_pursuit::bounds::{
    bm_identification_rate, maxcount_recovery_bound, shp_linearized_bound, shp_recovery_bound,
};
use hashing_pursuit::keyspace::{chi_square_uniform, digit_histograms, make_params};
use hashing_pursuit::stream::{generate, PlantedHitter, SyntheticConfig};
use hashing_pursuit::{
    score, BoyerMooreSketch, HashConfig, HeavyHitterReport, Key, MaxCountSketch, PermutationParams,
    ScalarTruth, ShpSketch,
};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

fn fail(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

/// Histograms of the four permuted octets over the block `base/prefix`.
#[wasm_bindgen]
pub fn octet_histograms(base: &str, prefix: u32, gamma: u32) -> Result<String, JsError> {
    if !(8..=32).contains(&prefix) {
        return Err(fail("prefix length must be between 8 and 32"));
    }
    let base: Key = base.parse().map_err(fail)?;
    let p = make_params(gamma).map_err(fail)?;
    let len = 1u64 << (32 - prefix);
    let start = base.0 & (u64::from(u32::MAX) << (32 - prefix)) as u32;
    let keys = (0..len).map(|t| Key(start.wrapping_add(t as u32)));
    let hists = digit_histograms(keys, &HashConfig::default(), &p).map_err(fail)?;
    let chi: Vec<f64> = hists.iter().map(|h| chi_square_uniform(h)).collect();
    Ok(json!({ "keys": len, "histograms": hists, "chi_square": chi, "df": 255 }).to_string())
}

/// Recovery bounds for `k = 1..=k_max` with `r = k`, plus the identification rate.
#[wasm_bindgen]
pub fn bound_curves(q: usize, m: usize, m_prime: usize, k_max: usize) -> Result<String, JsError> {
    let mut rows = Vec::new();
    for k in 1..=k_max.min(m) {
        rows.push(json!({
            "k": k,
            "shp": shp_recovery_bound(k, k, q, m).map_err(fail)?,
            "linearized": shp_linearized_bound(k, k, q, m).map_err(fail)?.max(0.0),
            "maxcount": maxcount_recovery_bound(k, k, q, m, m_prime).map_err(fail)?,
            "bm_ident": bm_identification_rate(k, m).map_err(fail)?,
        }));
    }
    Ok(Value::Array(rows).to_string())
}

fn entries(report: &HeavyHitterReport, truth: &ScalarTruth) -> Value {
    report
        .entries
        .iter()
        .map(|e| json!({ "key": e.key.to_string(), "estimate": e.estimate, "truth": truth.get(e.key) }))
        .collect()
}

/// Streams a synthetic trace with one planted byte hitter through SHP,
/// Max-Count and Boyer-Moore and scores their top `k`.
#[wasm_bindgen]
pub fn simulate(records: usize, share: f64, k: usize, seed: u64) -> Result<String, JsError> {
    let hitter = Key::from_octets(203, 0, 113, 7);
    let cfg = SyntheticConfig {
        n_records: records,
        planted: vec![PlantedHitter::volume(hitter, share)],
        seed,
        ..Default::default()
    };
    let params = PermutationParams::default();
    let mut shp = ShpSketch::new(
        HashConfig {
            m_prime: 1,
            ..HashConfig::default()
        },
        params,
    )
    .map_err(fail)?;
    let mut mc = MaxCountSketch::new(HashConfig::max_count(), params).map_err(fail)?;
    let mut bm = BoyerMooreSketch::new(HashConfig::boyer_moore(), params).map_err(fail)?;
    let mut truth = ScalarTruth::new();
    for r in generate(&cfg).map_err(fail)? {
        shp.update(r.src, r.bytes).map_err(fail)?;
        mc.update(r.src, r.bytes).map_err(fail)?;
        bm.update(r.src, r.bytes).map_err(fail)?;
        truth.update(r.src, r.bytes);
    }
    let top = truth.top_k(k);
    let mut out = serde_json::Map::new();
    for (name, report) in [
        ("shp", shp.top_k(k).map_err(fail)?),
        ("maxcount", mc.top_k(k).map_err(fail)?),
        ("boyermoore", bm.top_k(k).map_err(fail)?),
    ] {
        let m = score(&report, &top, k);
        out.insert(
            name.into(),
            json!({
                "ident_rate": m.identification_rate,
                "accuracy": m.mean_accuracy(),
                "entries": entries(&report, &truth),
            }),
        );
    }
    let exact: Vec<Value> = top
        .iter()
        .map(|t| json!({ "key": t.key.to_string(), "value": t.value }))
        .collect();
    out.insert("exact".into(), Value::Array(exact));
    out.insert("planted".into(), json!(hitter.to_string()));
    Ok(Value::Object(out).to_string())
}
