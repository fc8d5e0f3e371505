//! `qle`: command-line driver for the qlekit experiments.
//!
//! Exit codes: 0 success, 1 invalid arguments, 2 numerical failure, 3 failed
//! statistical test (`selftest` only).

mod config;
mod error;
mod field_cmds;
mod growth_cmds;
mod loewner_cmds;
mod maps_cmds;
mod output;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use qlekit::acceptance::{run_all, run_one, Scale};
use qlekit::C64;
use serde::Serialize;
use std::path::PathBuf;

use error::{CliError, CliResult};
use output::{Ctx, Format};

#[derive(Parser, Debug)]
#[command(name = "qle", version, about = "Simulations and checks for quantum Loewner evolution")]
struct Cli {
    /// Master seed; every random stream is derived from it.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Output directory.
    #[arg(long, global = true, default_value = "qle-out")]
    out: PathBuf,
    /// Flat key=value file of extra flags; explicit flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Worker threads for parallel runs (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Discrete Gaussian free field on an n×n grid.
    GffSample(field_cmds::GffArgs),
    /// LQG square tiling of a sampled field.
    LqgTile(field_cmds::TileArgs),
    /// Eden, DLA or η-DBM growth.
    #[command(subcommand)]
    Grow(growth_cmds::GrowCmd),
    /// First-passage percolation ball.
    Fpp(growth_cmds::FppArgs),
    /// Measure-driven radial Loewner evolution.
    #[command(subcommand)]
    Loewner(loewner_cmds::LoewnerCmd),
    /// Radial SLE runs and martingale checks.
    #[command(subcommand)]
    Sle(loewner_cmds::SleCmd),
    /// δ-approximations of QLE.
    #[command(subcommand)]
    Qle(loewner_cmds::QleCmd),
    /// Planar-map combinatorics.
    #[command(subcommand)]
    Maps(maps_cmds::MapsCmd),
    /// Exponent calculators.
    #[command(subcommand)]
    Scaling(maps_cmds::ScalingCmd),
    /// Runs the acceptance criteria (reduced sample counts by default).
    Selftest(SelftestArgs),
}

#[derive(Args, Debug, Serialize)]
struct SelftestArgs {
    /// Use the full sample counts.
    #[arg(long)]
    full: bool,
    /// Only these criteria (comma separated ids).
    #[arg(long, value_delimiter = ',')]
    criteria: Vec<usize>,
}

impl Command {
    fn name(&self) -> String {
        match self {
            Command::GffSample(_) => "gff-sample".into(),
            Command::LqgTile(_) => "lqg-tile".into(),
            Command::Grow(c) => format!("grow {}", c.name()),
            Command::Fpp(_) => "fpp".into(),
            Command::Loewner(c) => format!("loewner {}", c.name()),
            Command::Sle(c) => format!("sle {}", c.name()),
            Command::Qle(c) => format!("qle {}", c.name()),
            Command::Maps(c) => format!("maps {}", c.name()),
            Command::Scaling(c) => format!("scaling {}", c.name()),
            Command::Selftest(_) => "selftest".into(),
        }
    }
}

/// Parses `re` or `re,im`.
pub fn parse_c64(s: &str) -> Result<C64, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let f = |p: &str| p.parse::<f64>().map_err(|_| format!("not a number: {p:?}"));
    match parts.as_slice() {
        [re] => Ok(C64::new(f(re)?, 0.0)),
        [re, im] => Ok(C64::new(f(re)?, f(im)?)),
        _ => Err(format!("expected re or re,im, got {s:?}")),
    }
}

fn selftest(a: &SelftestArgs, ctx: &mut Ctx) -> CliResult<()> {
    let scale = if a.full { Scale::Full } else { Scale::Reduced };
    let results = if a.criteria.is_empty() {
        run_all(scale)
    } else {
        let mut v = Vec::new();
        for &id in &a.criteria {
            v.push(run_one(id, scale).ok_or_else(|| CliError::Usage(format!("no criterion {id}")))?);
        }
        v
    };
    for r in &results {
        println!("{r}");
    }
    ctx.json("selftest", &results)?;
    let failed: Vec<String> = results.iter().filter(|r| !r.passed).map(|r| r.id.to_string()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Statistical(format!("criteria {} failed", failed.join(", "))))
    }
}

fn execute(cli: &Cli) -> CliResult<()> {
    if let Some(j) = cli.jobs {
        if j == 0 {
            return Err(CliError::Usage("--jobs must be positive".into()));
        }
        // Fails only if a pool already exists, which is harmless.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(j).build_global();
    }
    let params = serde_json::to_value(&cli.command).map_err(|e| CliError::Usage(e.to_string()))?;
    let mut ctx = Ctx::new(&cli.out, cli.format, cli.seed, cli.command.name(), params)?;
    let outcome = match &cli.command {
        Command::GffSample(a) => field_cmds::gff_sample(a, &mut ctx),
        Command::LqgTile(a) => field_cmds::lqg_tile(a, &mut ctx),
        Command::Grow(c) => growth_cmds::grow(c, &mut ctx),
        Command::Fpp(a) => growth_cmds::fpp(a, &mut ctx),
        Command::Loewner(c) => loewner_cmds::loewner(c, &mut ctx),
        Command::Sle(c) => loewner_cmds::sle(c, &mut ctx),
        Command::Qle(c) => loewner_cmds::qle(c, &mut ctx),
        Command::Maps(c) => maps_cmds::maps(c, &mut ctx),
        Command::Scaling(c) => maps_cmds::scaling(c, &mut ctx),
        Command::Selftest(a) => selftest(a, &mut ctx),
    };
    // A failed statistical test still leaves a complete record.
    match outcome {
        Ok(()) => ctx.finish(),
        Err(e @ CliError::Statistical(_)) => {
            ctx.finish()?;
            Err(e)
        }
        Err(e) => Err(e),
    }
}

fn run(argv: Vec<String>) -> i32 {
    let argv = match config::merge(argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn main() {
    std::process::exit(run(std::env::args().collect()));
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_arguments() {
        assert_eq!(parse_c64("0.5").unwrap(), C64::new(0.5, 0.0));
        assert_eq!(parse_c64("-0.2, -0.2").unwrap(), C64::new(-0.2, -0.2));
        assert!(parse_c64("1,2,3").is_err());
        assert!(parse_c64("x").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
