use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "hpursuit",
    version,
    about = "Heavy-hitter identification with hashing-pursuit sketches"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic flow trace (CSV, gzip when the name ends in .gz).
    Generate(GenerateArgs),
    /// Stream a trace through the sketches and write per-window JSON-lines reports.
    Run(SketchArgs),
    /// Score the sketches against the exact oracle and write a metrics CSV.
    Evaluate(SketchArgs),
    /// Print analytic recovery bounds, optionally checked by Monte Carlo.
    Bounds(BoundsArgs),
    /// Measure update throughput and memory use over growing windows.
    Bench(BenchArgs),
}

#[derive(Debug, Args, Default, Clone)]
pub struct SketchArgs {
    /// key=value file; flags given on the command line take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Trace to read, or "-" for stdin.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Destination for reports or metrics (stdout when absent).
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Per-k aggregate CSV for `evaluate` (stderr when absent).
    #[arg(long)]
    pub summary: Option<PathBuf>,
    /// shp, maxcount, boyermoore, maxstable or exact; repeatable.
    #[arg(long = "algo")]
    pub algo: Vec<String>,
    /// src, dst or pair.
    #[arg(long)]
    pub key: Option<String>,
    /// bytes, packets, occurrences, set:dst, set:dport or set:ttl.
    #[arg(long)]
    pub value: Option<String>,
    /// A single k, a range such as 1-10, or a list such as 1,2,5.
    #[arg(long)]
    pub k: Option<String>,
    /// Records per window.
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub mprime: Option<usize>,
    #[arg(long)]
    pub q: Option<usize>,
    #[arg(long)]
    pub gamma: Option<u32>,
    /// Fréchet realizations per max-stable cell (odd).
    #[arg(long = "L")]
    pub depth: Option<usize>,
    /// Salt for the max-stable draws.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated window sizes; `evaluate` then reports one aggregate per size.
    #[arg(long = "sweep-windows", value_delimiter = ',')]
    pub sweep_windows: Vec<usize>,
}

#[derive(Debug, Args, Default, Clone)]
pub struct GenerateArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub records: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub zipf: Option<f64>,
    #[arg(long)]
    pub population: Option<usize>,
    /// KEY:SHARE, a volume hitter taking SHARE of all bytes; repeatable.
    #[arg(long)]
    pub plant: Vec<String>,
    /// KEY:ELEMENT:DISTINCT:SHARE, a scanner over dst, dport or ttl; repeatable.
    #[arg(long)]
    pub scan: Vec<String>,
    /// Omit the ttl column.
    #[arg(long)]
    pub no_ttl: bool,
}

#[derive(Debug, Args, Clone)]
pub struct BoundsArgs {
    /// A single k, a range such as 1-10, or a list.
    #[arg(long, default_value = "2,8")]
    pub k: String,
    /// Ranks to recover; defaults to k.
    #[arg(long)]
    pub r: Option<usize>,
    #[arg(long, default_value_t = 4)]
    pub q: usize,
    #[arg(long, default_value_t = 256)]
    pub m: usize,
    #[arg(long, default_value_t = 50)]
    pub mprime: usize,
    /// Monte-Carlo trials per row; 0 prints the analytic values only.
    #[arg(long, default_value_t = 0)]
    pub trials: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long = "algo")]
    pub algo: Vec<String>,
    /// exact (top-r recovery) or ident (identification rate).
    #[arg(long, default_value = "exact")]
    pub metric: String,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args, Clone)]
pub struct BenchArgs {
    #[arg(long = "algo")]
    pub algo: Vec<String>,
    #[arg(
        long = "sweep-windows",
        value_delimiter = ',',
        default_value = "50000,100000,250000,500000,1000000"
    )]
    pub sweep_windows: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub mprime: Option<usize>,
    #[arg(long)]
    pub q: Option<usize>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}
