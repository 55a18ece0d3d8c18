use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{self, BufReader, Write};
use std::path::Path;
use std::time::Instant;

use hashing_pursuit::bounds::{
    bm_identification_rate, bm_recovery_bound, maxcount_recovery_bound, monte_carlo_validate,
    shp_linearized_bound, shp_recovery_bound, MagnitudeProfile, Metric, ValidationOutcome,
    ValidationSpec, Verdict,
};
use hashing_pursuit::keyspace::{HashConfig, Key, PermutationParams};
use hashing_pursuit::oracle::ScalarTruth;
use hashing_pursuit::sketch::{BoyerMooreSketch, MaxCountSketch, ScalarSketch, ShpSketch};
use hashing_pursuit::stream::{
    generate, open_records, pair_candidates, try_windows, write_records, FlowRecord, KeySpec,
    PlantedHitter, RecordReader, SyntheticConfig,
};
use hashing_pursuit::{score, Algorithm, ElementKind, Footprint};

use crate::args::{BenchArgs, BoundsArgs, GenerateArgs};
use crate::config::{
    parse_algorithms, parse_config_with, parse_k_list, RunConfig, BM_M_PRIME, MAXCOUNT_M_PRIME,
};
use crate::engine::Engine;
use crate::error::{CliError, CliResult};

type Records = Box<dyn Iterator<Item = hashing_pursuit::Result<FlowRecord>>>;

fn open_input(path: Option<&Path>) -> CliResult<Records> {
    match path {
        None => Err(CliError::Config("--input is required".into())),
        Some(p) if p == Path::new("-") => {
            Ok(Box::new(RecordReader::new(BufReader::new(io::stdin()))))
        }
        Some(p) => {
            let reader = open_records(p)
                .map_err(|e| CliError::Input(format!("cannot open {}: {e}", p.display())))?;
            Ok(Box::new(reader))
        }
    }
}

fn open_output(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    match path {
        None => Ok(Box::new(io::BufWriter::new(io::stdout()))),
        Some(p) => hashing_pursuit::stream::create_output(p)
            .map_err(|e| CliError::Input(format!("cannot create {}: {e}", p.display()))),
    }
}

fn parse_key(raw: &str) -> CliResult<Key> {
    raw.parse().map_err(CliError::Config)
}

fn parse_share(raw: &str) -> CliResult<f64> {
    raw.trim()
        .parse()
        .map_err(|_| CliError::Config(format!("invalid share {raw:?}")))
}

fn parse_element(raw: &str) -> CliResult<ElementKind> {
    match raw.trim() {
        "dst" => Ok(ElementKind::Dst),
        "dport" => Ok(ElementKind::Dport),
        "ttl" => Ok(ElementKind::Ttl),
        other => Err(CliError::Config(format!(
            "unknown element type {other:?} (dst, dport, ttl)"
        ))),
    }
}

/// `KEY:SHARE` or `KEY:ELEMENT:DISTINCT:SHARE`.
pub fn parse_plant(raw: &str) -> CliResult<PlantedHitter> {
    let parts: Vec<&str> = raw.split(':').collect();
    match parts.as_slice() {
        [key, share] => Ok(PlantedHitter::volume(parse_key(key)?, parse_share(share)?)),
        [key, element, distinct, share] => {
            let distinct = distinct
                .trim()
                .parse()
                .map_err(|_| CliError::Config(format!("invalid distinct count {distinct:?}")))?;
            Ok(PlantedHitter::scan(
                parse_key(key)?,
                parse_element(element)?,
                distinct,
                parse_share(share)?,
            ))
        }
        _ => Err(CliError::Config(format!(
            "cannot parse planted hitter {raw:?}"
        ))),
    }
}

const GENERATE_KEYS: [&str; 8] = [
    "output",
    "records",
    "seed",
    "zipf",
    "population",
    "plant",
    "scan",
    "no-ttl",
];

/// Resolves `generate` arguments, config file under flags.
pub fn synthetic_config(args: &GenerateArgs) -> CliResult<SyntheticConfig> {
    let file = match &args.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| {
                CliError::Config(format!("cannot read config {}: {e}", p.display()))
            })?;
            parse_config_with(&text, &GENERATE_KEYS)?
        }
        None => BTreeMap::new(),
    };
    let get = |name: &str| file.get(name).map(String::as_str);
    let num = |flag: Option<String>, name: &str| -> CliResult<Option<String>> {
        Ok(flag.or_else(|| get(name).map(str::to_owned)))
    };
    let bad = |name: &str, v: &str| CliError::Config(format!("--{name}: cannot parse {v:?}"));
    let mut cfg = SyntheticConfig::default();
    if let Some(v) = num(args.records.map(|v| v.to_string()), "records")? {
        cfg.n_records = v.parse().map_err(|_| bad("records", &v))?;
    }
    if let Some(v) = num(args.seed.map(|v| v.to_string()), "seed")? {
        cfg.seed = v.parse().map_err(|_| bad("seed", &v))?;
    }
    if let Some(v) = num(args.zipf.map(|v| v.to_string()), "zipf")? {
        cfg.zipf_exponent = v.parse().map_err(|_| bad("zipf", &v))?;
    }
    if let Some(v) = num(args.population.map(|v| v.to_string()), "population")? {
        cfg.population = v.parse().map_err(|_| bad("population", &v))?;
    }
    let plants: Vec<String> = if args.plant.is_empty() && args.scan.is_empty() {
        ["plant", "scan"]
            .iter()
            .filter_map(|n| get(n))
            .flat_map(|v| v.split(',').map(str::to_owned).collect::<Vec<_>>())
            .collect()
    } else {
        args.plant.iter().chain(&args.scan).cloned().collect()
    };
    cfg.planted = plants
        .iter()
        .filter(|p| !p.trim().is_empty())
        .map(|p| parse_plant(p))
        .collect::<CliResult<_>>()?;
    cfg.with_ttl = !(args.no_ttl || get("no-ttl") == Some("true"));
    cfg.validate()?;
    Ok(cfg)
}

/// Writes the synthetic trace and returns the record count.
pub fn cmd_generate(args: &GenerateArgs) -> CliResult<usize> {
    let cfg = synthetic_config(args)?;
    let path = match &args.output {
        Some(p) => Some(p.clone()),
        None => match &args.config {
            Some(c) => {
                let text =
                    std::fs::read_to_string(c).map_err(|e| CliError::Config(e.to_string()))?;
                parse_config_with(&text, &GENERATE_KEYS)?
                    .get("output")
                    .map(Into::into)
            }
            None => None,
        },
    };
    let mut out = open_output(path.as_deref())?;
    let n = write_records(&mut out, generate(&cfg)?).map_err(CliError::output)?;
    out.flush().map_err(CliError::output)?;
    Ok(n)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunStats {
    pub windows: u64,
    pub records: u64,
    pub skipped: u64,
}

/// Streams the input and writes one JSON line per report entry.
pub fn cmd_run(cfg: &RunConfig) -> CliResult<RunStats> {
    let mut engine = Engine::new(cfg, false)?;
    let input = open_input(cfg.input.as_deref())?;
    let mut out = open_output(cfg.output.as_deref())?;
    let mut stats = RunStats::default();
    let (unit, element) = (cfg.signal.value.unit(), cfg.signal.value.element_kind());
    for batch in try_windows(input, cfg.window) {
        let batch = batch?;
        engine.reset();
        for r in &batch.records {
            engine.ingest(r)?;
        }
        for &a in engine.algorithms() {
            let report = engine.report(a, cfg.k_max())?.with_window(batch.id);
            let lines = if cfg.signal.key == KeySpec::Pair {
                let keys: Vec<Key> = report.keys().collect();
                let table = pair_candidates(&batch.records, &keys);
                report.json_lines_with(unit, element, |k| table.get(&k).copied())
            } else {
                report.json_lines(unit, element)
            };
            for line in lines {
                writeln!(out, "{line}").map_err(CliError::output)?;
            }
        }
        stats.windows += 1;
        stats.records += batch.records.len() as u64;
    }
    out.flush().map_err(CliError::output)?;
    stats.skipped = engine.skipped();
    Ok(stats)
}

/// One line of the metrics CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricRow {
    pub window: u64,
    pub algo: Algorithm,
    pub k: usize,
    pub ident_rate: f64,
    pub exact: bool,
    pub mean_est_accuracy: Option<f64>,
    pub sketch_bytes: usize,
    pub oracle_bytes: usize,
}

pub const METRICS_HEADER: &str =
    "window,algo,k,ident_rate,exact,mean_est_accuracy,sketch_bytes,oracle_bytes";
pub const SUMMARY_HEADER: &str =
    "window_size,algo,k,windows,ident_rate,exact_rate,mean_est_accuracy";

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

impl MetricRow {
    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{:.6},{},{},{},{}",
            self.window,
            self.algo,
            self.k,
            self.ident_rate,
            u8::from(self.exact),
            opt(self.mean_est_accuracy),
            self.sketch_bytes,
            self.oracle_bytes
        )
    }
}

/// Means over windows for one `(window size, algorithm, k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub window_size: usize,
    pub algo: Algorithm,
    pub k: usize,
    pub windows: usize,
    pub ident_rate: f64,
    pub exact_rate: f64,
    pub mean_est_accuracy: Option<f64>,
}

impl Aggregate {
    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{},{:.6},{:.6},{}",
            self.window_size,
            self.algo,
            self.k,
            self.windows,
            self.ident_rate,
            self.exact_rate,
            opt(self.mean_est_accuracy)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Evaluation {
    pub rows: Vec<MetricRow>,
    pub aggregates: Vec<Aggregate>,
    pub skipped: u64,
}

impl Evaluation {
    pub fn aggregate(&self, algo: Algorithm, k: usize) -> Option<&Aggregate> {
        self.aggregates.iter().find(|a| a.algo == algo && a.k == k)
    }
}

fn aggregate(
    rows: &[MetricRow],
    window_size: usize,
    algorithms: &[Algorithm],
    ks: &[usize],
) -> Vec<Aggregate> {
    let mut out = Vec::new();
    for &algo in algorithms {
        for &k in ks {
            let sel: Vec<&MetricRow> = rows.iter().filter(|r| r.algo == algo && r.k == k).collect();
            if sel.is_empty() {
                continue;
            }
            let n = sel.len() as f64;
            let acc: Vec<f64> = sel.iter().filter_map(|r| r.mean_est_accuracy).collect();
            out.push(Aggregate {
                window_size,
                algo,
                k,
                windows: sel.len(),
                ident_rate: sel.iter().map(|r| r.ident_rate).sum::<f64>() / n,
                exact_rate: sel.iter().filter(|r| r.exact).count() as f64 / n,
                mean_est_accuracy: (!acc.is_empty())
                    .then(|| acc.iter().sum::<f64>() / acc.len() as f64),
            });
        }
    }
    out
}

fn evaluate_windows(cfg: &RunConfig, window: usize) -> CliResult<Evaluation> {
    let mut engine = Engine::new(cfg, true)?;
    let input = open_input(cfg.input.as_deref())?;
    let mut rows = Vec::new();
    let k_max = cfg.k_max();
    for batch in try_windows(input, window) {
        let batch = batch?;
        engine.reset();
        for r in &batch.records {
            engine.ingest(r)?;
        }
        let truth = engine.truth(k_max);
        let oracle_bytes = engine.oracle_footprint().bytes;
        for &algo in engine.algorithms() {
            let sketch_bytes = engine.footprint(algo).bytes;
            for &k in &cfg.ks {
                let report = engine.report(algo, k)?;
                let m = score(&report, &truth, k);
                rows.push(MetricRow {
                    window: batch.id,
                    algo,
                    k,
                    ident_rate: m.identification_rate,
                    exact: m.exact_recovery,
                    mean_est_accuracy: m.mean_accuracy(),
                    sketch_bytes,
                    oracle_bytes,
                });
            }
        }
    }
    let aggregates = aggregate(&rows, window, &cfg.algorithms, &cfg.ks);
    Ok(Evaluation {
        rows,
        aggregates,
        skipped: engine.skipped(),
    })
}

/// Per-window metrics (or, with `sweep_windows`, one aggregate per window size)
/// to `output`, and per-k means to `summary`.
pub fn cmd_evaluate(cfg: &RunConfig) -> CliResult<Evaluation> {
    if !cfg.algorithms.contains(&Algorithm::Exact) {
        return Err(CliError::Config(
            "evaluate needs `exact` among the algorithms".into(),
        ));
    }
    if !cfg.sweep_windows.is_empty() && cfg.input.as_deref() == Some(Path::new("-")) {
        return Err(CliError::Config(
            "--sweep-windows needs a file input".into(),
        ));
    }
    let mut out = open_output(cfg.output.as_deref())?;
    let result = if cfg.sweep_windows.is_empty() {
        let ev = evaluate_windows(cfg, cfg.window)?;
        writeln!(out, "{METRICS_HEADER}").map_err(CliError::output)?;
        for row in &ev.rows {
            writeln!(out, "{}", row.csv()).map_err(CliError::output)?;
        }
        ev
    } else {
        let mut all = Evaluation::default();
        writeln!(out, "{SUMMARY_HEADER}").map_err(CliError::output)?;
        for &w in &cfg.sweep_windows {
            let ev = evaluate_windows(cfg, w)?;
            for a in &ev.aggregates {
                writeln!(out, "{}", a.csv()).map_err(CliError::output)?;
            }
            all.rows.extend(ev.rows);
            all.aggregates.extend(ev.aggregates);
            all.skipped += ev.skipped;
        }
        all
    };
    out.flush().map_err(CliError::output)?;

    let mut summary = String::new();
    let _ = writeln!(summary, "{SUMMARY_HEADER}");
    for a in &result.aggregates {
        let _ = writeln!(summary, "{}", a.csv());
    }
    match &cfg.summary {
        Some(p) => std::fs::write(p, summary).map_err(CliError::output)?,
        None => eprint!("{summary}"),
    }
    Ok(result)
}

/// One row of the `bounds` table.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundRow {
    pub algo: Algorithm,
    pub metric: Metric,
    pub k: usize,
    pub bound: f64,
    pub linearized: Option<f64>,
    pub outcome: Option<ValidationOutcome>,
}

pub const BOUNDS_HEADER: &str =
    "algo,metric,k,r,bound,linearized,empirical,se,ci_low,ci_high,verdict";

impl BoundRow {
    pub fn csv(&self) -> String {
        let (metric, r) = match self.metric {
            Metric::ExactRecovery { r } => ("exact", r.to_string()),
            Metric::IdentificationRate => ("ident", String::new()),
        };
        let mc = match &self.outcome {
            Some(o) => format!(
                "{:.6},{:.6},{:.6},{:.6},{}",
                o.empirical,
                o.standard_error,
                o.ci.0,
                o.ci.1,
                match o.verdict {
                    Verdict::Consistent => "consistent",
                    Verdict::Violated => "violated",
                    Verdict::Unbounded => "unbounded",
                }
            ),
            None => ",,,,".into(),
        };
        format!(
            "{},{metric},{},{r},{:.6},{},{mc}",
            self.algo,
            self.k,
            self.bound,
            opt(self.linearized)
        )
    }
}

/// Default magnitudes for a `k`-sparse check.
pub fn default_profile(k: usize) -> MagnitudeProfile {
    if k <= 62 {
        MagnitudeProfile::PowersOfTwo
    } else {
        MagnitudeProfile::Descending
    }
}

pub fn cmd_bounds(args: &BoundsArgs) -> CliResult<Vec<BoundRow>> {
    let ks = parse_k_list(&args.k)?;
    let mut algos = parse_algorithms(&args.algo)?;
    let ident = match args.metric.as_str() {
        "exact" => false,
        "ident" => true,
        other => {
            return Err(CliError::Config(format!(
                "unknown metric {other:?} (exact, ident)"
            )))
        }
    };
    if algos.is_empty() {
        algos = if ident {
            vec![Algorithm::BoyerMoore]
        } else {
            vec![Algorithm::Shp, Algorithm::MaxCount, Algorithm::BoyerMoore]
        };
    }
    let mut rows = Vec::new();
    for &k in &ks {
        let r = args.r.unwrap_or(k);
        let metric = if ident {
            Metric::IdentificationRate
        } else {
            Metric::ExactRecovery { r }
        };
        for &algo in &algos {
            let (config, bound, linearized) = match (algo, ident) {
                (Algorithm::Shp, false) => (
                    HashConfig {
                        q: args.q,
                        m: args.m,
                        m_prime: 1,
                        ..HashConfig::default()
                    },
                    shp_recovery_bound(k, r, args.q, args.m)?,
                    Some(shp_linearized_bound(k, r, args.q, args.m)?),
                ),
                (Algorithm::MaxCount, false) => (
                    HashConfig {
                        q: args.q,
                        m: args.m,
                        m_prime: args.mprime,
                        ..HashConfig::default()
                    },
                    maxcount_recovery_bound(k, r, args.q, args.m, args.mprime)?,
                    None,
                ),
                (Algorithm::BoyerMoore, false) => (
                    HashConfig {
                        m: args.m,
                        m_prime: BM_M_PRIME,
                        ..HashConfig::default()
                    },
                    bm_recovery_bound(k, r, args.m)?,
                    None,
                ),
                (Algorithm::BoyerMoore, true) => (
                    HashConfig {
                        m: args.m,
                        m_prime: BM_M_PRIME,
                        ..HashConfig::default()
                    },
                    bm_identification_rate(k, args.m)?,
                    None,
                ),
                (a, _) => {
                    return Err(CliError::Config(format!(
                        "no {} bound for {a}",
                        args.metric
                    )));
                }
            };
            let outcome = if args.trials > 0 {
                Some(monte_carlo_validate(&ValidationSpec {
                    algorithm: algo,
                    config,
                    params: PermutationParams::default(),
                    k,
                    metric,
                    profile: default_profile(k),
                    trials: args.trials,
                    seed: args.seed,
                })?)
            } else {
                None
            };
            rows.push(BoundRow {
                algo,
                metric,
                k,
                bound,
                linearized,
                outcome,
            });
        }
    }
    let mut out = open_output(args.output.as_deref())?;
    writeln!(out, "{BOUNDS_HEADER}").map_err(CliError::output)?;
    for row in &rows {
        writeln!(out, "{}", row.csv()).map_err(CliError::output)?;
    }
    out.flush().map_err(CliError::output)?;
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub algo: Algorithm,
    pub window: usize,
    pub updates_per_sec: f64,
    pub counters: usize,
    pub slots: usize,
    pub sketch_bytes: usize,
    pub oracle_entries: usize,
    pub oracle_bytes: usize,
}

pub const BENCH_HEADER: &str =
    "algo,window,updates_per_sec,counters,slots,sketch_bytes,oracle_entries,oracle_bytes";

pub fn cmd_bench(args: &BenchArgs) -> CliResult<Vec<BenchRow>> {
    let mut algos = parse_algorithms(&args.algo)?;
    if algos.is_empty() {
        algos = vec![Algorithm::Shp, Algorithm::MaxCount, Algorithm::BoyerMoore];
    }
    let mut windows = args.sweep_windows.clone();
    windows.sort_unstable();
    windows.dedup();
    if windows.is_empty() || windows[0] == 0 {
        return Err(CliError::Config(
            "--sweep-windows needs positive sizes".into(),
        ));
    }
    let (q, m) = (args.q.unwrap_or(4), args.m.unwrap_or(256));
    let params = PermutationParams::default();
    let longest = *windows.last().expect("non-empty");
    let trace = SyntheticConfig {
        n_records: longest,
        planted: vec![PlantedHitter::volume(Key::from_octets(203, 0, 113, 7), 0.2)],
        seed: args.seed,
        ..Default::default()
    };
    let records: Vec<(Key, u64)> = generate(&trace)?.map(|r| (r.src, r.bytes)).collect();

    let mut oracle_at = Vec::new();
    let mut truth = ScalarTruth::new();
    let mut fed = 0;
    for &w in &windows {
        for &(k, v) in &records[fed..w] {
            truth.update(k, v);
        }
        fed = w;
        oracle_at.push((truth.len(), truth.footprint().bytes));
    }

    let mut rows = Vec::new();
    for &algo in &algos {
        for (&w, &(oracle_entries, oracle_bytes)) in windows.iter().zip(&oracle_at) {
            let mut sketch: Box<dyn ScalarSketch> = match algo {
                Algorithm::Shp => Box::new(ShpSketch::new(
                    HashConfig {
                        q,
                        m,
                        m_prime: 1,
                        ..HashConfig::default()
                    },
                    params,
                )?),
                Algorithm::MaxCount => Box::new(MaxCountSketch::new(
                    HashConfig {
                        q,
                        m,
                        m_prime: args.mprime.unwrap_or(MAXCOUNT_M_PRIME),
                        ..HashConfig::default()
                    },
                    params,
                )?),
                Algorithm::BoyerMoore => Box::new(BoyerMooreSketch::new(
                    HashConfig {
                        q,
                        m,
                        m_prime: args.mprime.unwrap_or(BM_M_PRIME),
                        ..HashConfig::default()
                    },
                    params,
                )?),
                a => {
                    return Err(CliError::Config(format!(
                        "bench covers scalar sketches only, not {a}"
                    )))
                }
            };
            let start = Instant::now();
            for &(k, v) in &records[..w] {
                sketch.update(k, v)?;
            }
            let secs = start.elapsed().as_secs_f64().max(1e-9);
            let fp = sketch.footprint();
            rows.push(BenchRow {
                algo,
                window: w,
                updates_per_sec: w as f64 / secs,
                counters: fp.counters,
                slots: fp.slots,
                sketch_bytes: fp.bytes,
                oracle_entries,
                oracle_bytes,
            });
        }
    }
    let mut out = open_output(args.output.as_deref())?;
    writeln!(out, "{BENCH_HEADER}").map_err(CliError::output)?;
    for r in &rows {
        writeln!(
            out,
            "{},{},{:.0},{},{},{},{},{}",
            r.algo,
            r.window,
            r.updates_per_sec,
            r.counters,
            r.slots,
            r.sketch_bytes,
            r.oracle_entries,
            r.oracle_bytes
        )
        .map_err(CliError::output)?;
    }
    out.flush().map_err(CliError::output)?;
    Ok(rows)
}
