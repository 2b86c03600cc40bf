use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Parser, ValueEnum};

use tvauction::experiment::preset::{DEFAULT_HORIZON, DEFAULT_SEED};
use tvauction::experiment::validate::{self, BatteryOptions, Fault};
use tvauction::experiment::{batch_dir, run_batch, write_run, Preset, RunConfig};
use tvauction::{RunSummary, SimulationTrace};

const EXIT_VALIDATION_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;

/// Learning bidders in first-price auctions with drifting value distributions,
/// compared against the second-price benchmark.
#[derive(Debug, Parser)]
#[command(name = "tvauction", version)]
#[command(group(ArgGroup::new("mode").required(true).args(["preset", "config", "validate"])))]
struct Cli {
    /// Run a named experiment.
    #[arg(long, value_name = "NAME", value_parser = parse_preset)]
    preset: Option<Preset>,

    /// Run the experiment described by a `key = value` configuration file.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Run the closed-form versus finite-difference and Monte-Carlo battery.
    #[arg(long)]
    validate: bool,

    /// Random seed (first seed of a batch).
    #[arg(long)]
    seed: Option<u64>,

    /// Simulation horizon.
    #[arg(long = "T", value_name = "REAL")]
    horizon: Option<f64>,

    /// RK4 step size h.
    #[arg(long, value_name = "REAL")]
    step: Option<f64>,

    /// Learning rate eta.
    #[arg(long, value_name = "REAL")]
    rate: Option<f64>,

    /// Number of bidders.
    #[arg(long)]
    n: Option<usize>,

    /// Output directory.
    #[arg(long, env = "TVAUCTION_OUT", default_value = "out")]
    out: PathBuf,

    /// Keep every k-th integration step in trace.csv.
    #[arg(long, value_name = "INT")]
    record_every: Option<usize>,

    /// Monte-Carlo samples per check in --validate.
    #[arg(long, default_value_t = 1_000_000)]
    samples: u64,

    /// Run this many consecutive seeds in parallel, one directory per seed.
    #[arg(long, value_name = "INT", value_parser = clap::value_parser!(u64).range(1..))]
    batch: Option<u64>,

    /// Also write plot.svg.
    #[arg(long)]
    svg: bool,

    /// Deliberately break the first-price bid slope in --validate.
    #[arg(long, value_enum, default_value_t = FaultArg::None)]
    fault: FaultArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FaultArg {
    None,
    WrongAlpha,
}

fn parse_preset(s: &str) -> Result<Preset, String> {
    s.parse()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn run(cli: &Cli) -> Result<ExitCode, String> {
    if cli.validate {
        return Ok(run_validation(cli));
    }
    let mut config = match (&cli.preset, &cli.config) {
        (Some(p), _) => p.config(DEFAULT_SEED, DEFAULT_HORIZON),
        (None, Some(path)) => {
            RunConfig::from_file(path).map_err(|e| format!("{}: {e}", path.display()))?
        }
        (None, None) => unreachable!("clap enforces a mode"),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(t) = cli.horizon {
        config.horizon = t;
    }
    if let Some(h) = cli.step {
        config.h = h;
    }
    if let Some(eta) = cli.rate {
        config.eta = eta;
    }
    if let Some(n) = cli.n {
        config.n = n;
    }
    if let Some(r) = cli.record_every {
        config.record_every = r;
    }

    match cli.batch {
        None => {
            let (trace, summary) = config.execute().map_err(|e| e.to_string())?;
            emit(&cli.out, &config, &trace, &summary, cli.svg)?;
        }
        Some(count) => {
            for (seed, result) in run_batch(&config, count) {
                let (trace, summary) = result.map_err(|e| format!("seed {seed}: {e}"))?;
                let c = RunConfig {
                    seed,
                    ..config.clone()
                };
                emit(&batch_dir(&cli.out, seed), &c, &trace, &summary, cli.svg)?;
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn emit(
    dir: &Path,
    config: &RunConfig,
    trace: &SimulationTrace,
    summary: &RunSummary,
    svg: bool,
) -> Result<(), String> {
    write_run(dir, config, trace, summary, svg)
        .map_err(|e| format!("writing {}: {e}", dir.display()))?;
    let bound = match (summary.bound_low, summary.bound_high) {
        (Some(lo), _) => format!(" bound_low={lo:.6e}"),
        (None, Some(hi)) => format!(" bound_high={hi:.6e}"),
        _ => String::new(),
    };
    println!(
        "seed={} T={} gap={:.6e} envelope={:.6e}{} verdict={} -> {}",
        config.seed,
        config.horizon,
        summary.gap,
        summary.equivalence_envelope,
        bound,
        summary.verdict,
        dir.display()
    );
    Ok(())
}

fn run_validation(cli: &Cli) -> ExitCode {
    let opts = BatteryOptions {
        samples: cli.samples,
        seed: cli.seed.unwrap_or(DEFAULT_SEED),
        fault: match cli.fault {
            FaultArg::None => Fault::None,
            FaultArg::WrongAlpha => Fault::WrongAlpha,
        },
    };
    let results = match validate::run_battery(&opts) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    print!("{}", validate::format_table(&results));
    if results.iter().all(|r| r.passed) {
        println!(
            "all checks passed ({} samples, seed {})",
            opts.samples, opts.seed
        );
        ExitCode::SUCCESS
    } else {
        println!("validation FAILED");
        ExitCode::from(EXIT_VALIDATION_FAILED)
    }
}
