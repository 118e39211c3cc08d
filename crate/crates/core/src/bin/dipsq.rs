//! Command-line front end.
//!
//! Exit codes: 0 success, 2 usage, 3 parse error, 4 invalid parameters,
//! 5 numerical failure, 6 cutoff-limited Fock run, 7 I/O failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dipsq::io::{parse_config, profile, run_scenario, sweep, RunConfig, RunOutput, SweepSpec, SweepTarget, PROFILES};
use dipsq::{Error, ExitClass};

#[derive(Parser)]
#[command(name = "dipsq", version, about = "Cantilever-driven squeezing of trapped polar molecules")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct OutArgs {
    /// Output directory (overrides output.dir in the config).
    #[arg(long, env = "DIPSQ_OUT_DIR")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a shipped profile or a config file.
    Run {
        #[arg(long, conflicts_with = "config", required_unless_present = "config")]
        profile: Option<String>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        out: OutArgs,
        /// Also write an SVG plot for each figure trace.
        #[arg(long)]
        svg: bool,
    },
    /// Sweep one numeric parameter and tabulate summary observables.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Config key or short name (R, D, N_bar, omega_c, ...).
        #[arg(long)]
        axis: String,
        #[arg(long, allow_negative_numbers = true)]
        min: f64,
        #[arg(long, allow_negative_numbers = true)]
        max: f64,
        #[arg(long)]
        points: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// List the shipped profiles.
    ListProfiles,
}

fn load(path: &PathBuf) -> Result<RunConfig, Error> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text)
}

fn finish(out: RunOutput, dir: PathBuf) -> Result<bool, Error> {
    let paths = out.write(&dir)?;
    for line in &out.summary {
        println!("{line}");
    }
    for p in paths {
        println!("wrote {}", p.display());
    }
    Ok(out.cutoff_limited)
}

fn output_dir(flag: Option<PathBuf>, cfg: &RunConfig) -> PathBuf {
    flag.or_else(|| cfg.output.dir.clone()).unwrap_or_else(|| PathBuf::from("."))
}

fn execute(cli: Cli) -> Result<bool, Error> {
    match cli.command {
        Command::ListProfiles => {
            for (name, description, _) in PROFILES {
                println!("{name:<22} {description}");
            }
            Ok(false)
        }
        Command::Run { profile: name, config, out, svg } => {
            let mut cfg = match (name, config) {
                (Some(name), _) => profile(&name)?,
                (None, Some(path)) => load(&path)?,
                (None, None) => unreachable!("clap requires one of --profile/--config"),
            };
            cfg.output.svg |= svg;
            let dir = output_dir(out.out, &cfg);
            finish(run_scenario(&cfg)?, dir)
        }
        Command::Sweep { config, axis, min, max, points, out } => {
            let mut cfg = load(&config)?;
            let target = cfg.sweep.as_ref().map_or(SweepTarget::for_scenario(cfg.scenario), |s| s.target);
            let axis = dipsq::io::resolve_axis(&axis)?.to_string();
            cfg.sweep = Some(SweepSpec { axis, min, max, points, target });
            cfg.validate()?;
            let dir = output_dir(out.out, &cfg);
            finish(sweep(&cfg)?, dir)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => {
            eprintln!("warning: truncated Fock basis too small; results are cutoff-limited");
            ExitCode::from(ExitClass::CutoffLimited.code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_class().code() as u8)
        }
    }
}
