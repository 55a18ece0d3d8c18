//! Experiments over flow traces: trace generation, windowed sketching,
//! scoring against the exact oracle, analytic bounds and benchmarks.

pub mod args;
pub mod commands;
pub mod config;
pub mod engine;
pub mod error;

pub use args::{BenchArgs, BoundsArgs, Cli, Command, GenerateArgs, SketchArgs};
pub use commands::{
    cmd_bench, cmd_bounds, cmd_evaluate, cmd_generate, cmd_run, Aggregate, Evaluation, MetricRow,
};
pub use config::RunConfig;
pub use error::{CliError, CliResult};

/// Dispatches a parsed command line.
pub fn execute(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Generate(a) => {
            let n = cmd_generate(a)?;
            eprintln!("wrote {n} records");
        }
        Command::Run(a) => {
            let stats = cmd_run(&RunConfig::resolve(a)?)?;
            eprintln!(
                "{} windows, {} records, {} skipped",
                stats.windows, stats.records, stats.skipped
            );
        }
        Command::Evaluate(a) => {
            let ev = cmd_evaluate(&RunConfig::resolve(a)?)?;
            if ev.skipped > 0 {
                eprintln!("{} records skipped", ev.skipped);
            }
        }
        Command::Bounds(a) => {
            cmd_bounds(a)?;
        }
        Command::Bench(a) => {
            cmd_bench(a)?;
        }
    }
    Ok(())
}
