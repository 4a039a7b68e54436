use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use kzstring_cli::{
    run_compare, run_kzmap, run_simulate, run_verify, Outcome, RunError, ScenarioConfig,
};

/// Exact evolution of relativistic strings, with verification against
/// brute-force solvers.
#[derive(Parser, Debug)]
#[command(name = "kzstring", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug)]
struct Common {
    /// Scenario file (TOML with dotted keys).
    #[arg(long, short)]
    config: PathBuf,
    /// Output directory; overrides `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// θ- and σ-grid size; overrides `grid.theta_nodes` and `grid.sigma_nodes`.
    #[arg(long)]
    nodes: Option<usize>,
    /// Print nothing on success.
    #[arg(long, short)]
    quiet: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evolve the data and write one CSV per output time.
    Simulate(Common),
    /// Check gauge, transform identities, harmonicity and periodicity.
    Verify(Common),
    /// Compare against the nonlinear reference solver under refinement.
    Compare(Common),
    /// Dump the tabulated coordinate map.
    Kzmap(Common),
}

fn load(common: &Common) -> anyhow::Result<ScenarioConfig> {
    let text = std::fs::read_to_string(&common.config)
        .with_context(|| format!("reading {}", common.config.display()))?;
    let mut cfg = ScenarioConfig::parse(&text).map_err(RunError::from)?;
    if let Some(out) = &common.out {
        cfg.output_dir = out.clone();
    }
    if let Some(n) = common.nodes {
        if n < kzstring_cli::config::MIN_NODES {
            return Err(RunError::from(kzstring_cli::ConfigError::new(
                "--nodes",
                format!("must be at least {}", kzstring_cli::config::MIN_NODES),
            ))
            .into());
        }
        cfg.theta_nodes = n;
        cfg.sigma_nodes = n;
    }
    Ok(cfg)
}

type Runner = fn(&ScenarioConfig) -> Result<Outcome, RunError>;

fn run(cli: &Cli) -> anyhow::Result<(Outcome, bool)> {
    let (common, f): (&Common, Runner) = match &cli.command {
        Command::Simulate(c) => (c, run_simulate),
        Command::Verify(c) => (c, run_verify),
        Command::Compare(c) => (c, run_compare),
        Command::Kzmap(c) => (c, run_kzmap),
    };
    let cfg = load(common)?;
    Ok((f(&cfg)?, common.quiet))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((outcome, quiet)) => {
            let code = outcome.exit_code();
            if !quiet || code != 0 {
                print!("{}", outcome.summary.render());
            }
            if let Some(e) = &outcome.check_error {
                eprintln!("error: numeric failure: {e}");
            }
            ExitCode::from(code as u8)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            // Unreadable config files count as configuration errors.
            let code = e.downcast_ref::<RunError>().map_or(2, RunError::exit_code);
            ExitCode::from(code as u8)
        }
    }
}
