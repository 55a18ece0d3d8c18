use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use hashing_pursuit::keyspace::{HashConfig, PermutationParams};
use hashing_pursuit::sketch::DEFAULT_DEPTH;
use hashing_pursuit::stream::{KeySpec, SignalSpec, ValueSpec};
use hashing_pursuit::Algorithm;

use crate::args::SketchArgs;
use crate::error::{CliError, CliResult};

pub const DEFAULT_WINDOW: usize = 100_000;
pub const MAXCOUNT_M_PRIME: usize = 50;
pub const BM_M_PRIME: usize = 256;

const KNOWN_KEYS: [&str; 15] = [
    "input",
    "output",
    "summary",
    "algo",
    "key",
    "value",
    "k",
    "window",
    "m",
    "mprime",
    "q",
    "gamma",
    "L",
    "seed",
    "sweep-windows",
];

/// Reads a `key = value` file in TOML syntax into flag-shaped strings.
pub fn read_config_file(path: &Path) -> CliResult<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> CliResult<BTreeMap<String, String>> {
    parse_config_with(text, &KNOWN_KEYS)
}

/// Like [`parse_config`] with a caller-supplied set of accepted keys.
pub fn parse_config_with(text: &str, known: &[&str]) -> CliResult<BTreeMap<String, String>> {
    let table: toml::Table = text
        .parse()
        .map_err(|e| CliError::Config(format!("config file: {e}")))?;
    let mut out = BTreeMap::new();
    for (k, v) in table {
        let key = k.replace('_', "-");
        if !known.contains(&key.as_str()) {
            return Err(CliError::Config(format!("unknown config key {k:?}")));
        }
        let flat = match v {
            toml::Value::String(s) => s,
            toml::Value::Integer(i) => i.to_string(),
            toml::Value::Float(f) => f.to_string(),
            toml::Value::Boolean(b) => b.to_string(),
            toml::Value::Array(items) => items
                .iter()
                .map(|i| match i {
                    toml::Value::String(s) => s.clone(),
                    other => other.to_string(),
                })
                .collect::<Vec<_>>()
                .join(","),
            other => {
                return Err(CliError::Config(format!(
                    "config key {k:?} has unsupported value {other}"
                )))
            }
        };
        out.insert(key, flat);
    }
    Ok(out)
}

fn num<T: std::str::FromStr>(name: &str, raw: &str) -> CliResult<T> {
    raw.trim()
        .parse()
        .map_err(|_| CliError::Config(format!("--{name}: cannot parse {raw:?}")))
}

/// `4`, `1-10` or `1,2,5`.
pub fn parse_k_list(raw: &str) -> CliResult<Vec<usize>> {
    let mut ks = Vec::new();
    for part in raw.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((a, b)) = part.split_once('-') {
            let (a, b): (usize, usize) = (num("k", a)?, num("k", b)?);
            if a > b {
                return Err(CliError::Config(format!("--k: empty range {part}")));
            }
            ks.extend(a..=b);
        } else {
            ks.push(num("k", part)?);
        }
    }
    ks.sort_unstable();
    ks.dedup();
    if ks.is_empty() || ks[0] == 0 {
        return Err(CliError::Config("--k needs values of at least 1".into()));
    }
    Ok(ks)
}

pub fn parse_algorithms(raw: &[String]) -> CliResult<Vec<Algorithm>> {
    let mut out = Vec::new();
    for a in raw
        .iter()
        .flat_map(|s| s.split(','))
        .map(str::trim)
        .filter(|s| !s.is_empty())
    {
        let alg: Algorithm = a.parse().map_err(CliError::Config)?;
        if !out.contains(&alg) {
            out.push(alg);
        }
    }
    Ok(out)
}

/// Fully resolved settings for `run` and `evaluate`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub summary: Option<PathBuf>,
    pub algorithms: Vec<Algorithm>,
    pub signal: SignalSpec,
    pub ks: Vec<usize>,
    pub window: usize,
    pub q: usize,
    pub m: usize,
    pub m_prime: Option<usize>,
    pub gamma: u32,
    pub depth: usize,
    pub seed: u64,
    pub sweep_windows: Vec<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            input: None,
            output: None,
            summary: None,
            algorithms: Vec::new(),
            signal: SignalSpec::default(),
            ks: vec![1],
            window: DEFAULT_WINDOW,
            q: 4,
            m: 256,
            m_prime: None,
            gamma: 3,
            depth: DEFAULT_DEPTH,
            seed: 1,
            sweep_windows: Vec::new(),
        }
    }
}

impl RunConfig {
    /// Merges the config file (if any) under the flags and validates the result.
    pub fn resolve(args: &SketchArgs) -> CliResult<Self> {
        let file = match &args.config {
            Some(p) => read_config_file(p)?,
            None => BTreeMap::new(),
        };
        let pick = |flag: Option<String>, name: &str| flag.or_else(|| file.get(name).cloned());
        let mut c = RunConfig::default();

        c.input = pick(
            args.input.as_ref().map(|p| p.display().to_string()),
            "input",
        )
        .map(PathBuf::from);
        c.output = pick(
            args.output.as_ref().map(|p| p.display().to_string()),
            "output",
        )
        .map(PathBuf::from);
        c.summary = pick(
            args.summary.as_ref().map(|p| p.display().to_string()),
            "summary",
        )
        .map(PathBuf::from);
        let algos = if args.algo.is_empty() {
            file.get("algo")
                .map(|a| vec![a.clone()])
                .unwrap_or_default()
        } else {
            args.algo.clone()
        };
        c.algorithms = parse_algorithms(&algos)?;
        if let Some(k) = pick(args.key.clone(), "key") {
            c.signal.key = k
                .parse::<KeySpec>()
                .map_err(|e| CliError::Config(e.to_string()))?;
        }
        if let Some(v) = pick(args.value.clone(), "value") {
            c.signal.value = v
                .parse::<ValueSpec>()
                .map_err(|e| CliError::Config(e.to_string()))?;
        }
        if let Some(k) = pick(args.k.clone(), "k") {
            c.ks = parse_k_list(&k)?;
        }
        if let Some(w) = pick(args.window.map(|v| v.to_string()), "window") {
            c.window = num("window", &w)?;
        }
        if let Some(v) = pick(args.m.map(|v| v.to_string()), "m") {
            c.m = num("m", &v)?;
        }
        if let Some(v) = pick(args.mprime.map(|v| v.to_string()), "mprime") {
            c.m_prime = Some(num("mprime", &v)?);
        }
        if let Some(v) = pick(args.q.map(|v| v.to_string()), "q") {
            c.q = num("q", &v)?;
        }
        if let Some(v) = pick(args.gamma.map(|v| v.to_string()), "gamma") {
            c.gamma = num("gamma", &v)?;
        }
        if let Some(v) = pick(args.depth.map(|v| v.to_string()), "L") {
            c.depth = num("L", &v)?;
        }
        if let Some(v) = pick(args.seed.map(|v| v.to_string()), "seed") {
            c.seed = num("seed", &v)?;
        }
        c.sweep_windows = if args.sweep_windows.is_empty() {
            match file.get("sweep-windows") {
                Some(s) => s
                    .split(',')
                    .map(|w| num("sweep-windows", w))
                    .collect::<CliResult<_>>()?,
                None => Vec::new(),
            }
        } else {
            args.sweep_windows.clone()
        };
        if c.algorithms.is_empty() {
            c.algorithms = if c.signal.value.is_set() {
                vec![Algorithm::MaxStable, Algorithm::Exact]
            } else {
                vec![
                    Algorithm::Shp,
                    Algorithm::MaxCount,
                    Algorithm::BoyerMoore,
                    Algorithm::Exact,
                ]
            };
        }
        c.validate()?;
        Ok(c)
    }

    pub fn params(&self) -> CliResult<PermutationParams> {
        Ok(PermutationParams::new(self.gamma)?)
    }

    fn base(&self, m_prime: usize) -> HashConfig {
        HashConfig {
            q: self.q,
            m: self.m,
            m_prime,
            ..HashConfig::default()
        }
    }

    pub fn shp_config(&self) -> HashConfig {
        self.base(1)
    }

    pub fn maxcount_config(&self) -> HashConfig {
        self.base(self.m_prime.unwrap_or(MAXCOUNT_M_PRIME))
    }

    pub fn bm_config(&self) -> HashConfig {
        self.base(self.m_prime.unwrap_or(BM_M_PRIME))
    }

    pub fn k_max(&self) -> usize {
        *self.ks.last().expect("k list is never empty")
    }

    pub fn validate(&self) -> CliResult<()> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.window == 0 {
            return bad("--window must be at least 1".into());
        }
        if self.sweep_windows.contains(&0) {
            return bad("--sweep-windows entries must be at least 1".into());
        }
        if self.ks.is_empty() || self.ks[0] == 0 {
            return bad("--k needs values of at least 1".into());
        }
        let params = self.params()?;
        let set = self.signal.value.is_set();
        let k = self.k_max();
        for &a in &self.algorithms {
            match a {
                Algorithm::MaxStable if !set => {
                    return bad(format!(
                        "maxstable needs a set:* value spec, not {}",
                        self.signal.value
                    ));
                }
                Algorithm::Shp | Algorithm::MaxCount | Algorithm::BoyerMoore if set => {
                    return bad(format!(
                        "{} needs a scalar value spec, not {}",
                        a.as_str(),
                        self.signal.value
                    ));
                }
                _ => {}
            }
            match a {
                Algorithm::Shp => {
                    self.shp_config().validate(&params)?;
                    if k > self.m {
                        return bad(format!("k = {k} exceeds m = {} for shp", self.m));
                    }
                }
                Algorithm::MaxCount => {
                    let c = self.maxcount_config();
                    c.validate(&params)?;
                    c.validate_thinning(&params)?;
                    let limit = c.q * c.m * c.m_prime;
                    if k > limit {
                        return bad(format!("k = {k} exceeds {limit} for maxcount"));
                    }
                }
                Algorithm::BoyerMoore => {
                    self.bm_config().validate_thinning(&params)?;
                    if k > self.m {
                        return bad(format!("k = {k} exceeds m = {} for boyermoore", self.m));
                    }
                }
                Algorithm::MaxStable => {
                    self.shp_config().validate(&params)?;
                    if self.depth.is_multiple_of(2) {
                        return bad(format!("--L = {} must be odd", self.depth));
                    }
                }
                Algorithm::Exact => {}
            }
        }
        Ok(())
    }
}
