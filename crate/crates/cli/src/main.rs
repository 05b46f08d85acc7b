use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use toric_chords::Shape;
use toric_chords_cli::config::{CommandKind, Overrides, RunConfig};
use toric_chords_cli::{run, CliError};

/// Capacities, Reeb orbits and Reeb chords of toric star-shaped domains.
#[derive(Parser)]
#[command(name = "toric-chords", version)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalArgs {
    /// TOML run configuration.
    #[arg(long, global = true, env = "TORIC_CHORDS_CONFIG")]
    config: Option<PathBuf>,
    /// Directory for JSON and CSV output.
    #[arg(long, global = true, env = "TORIC_CHORDS_OUT")]
    out: Option<PathBuf>,
    #[arg(long, global = true, env = "TORIC_CHORDS_SEED")]
    seed: Option<u64>,
    /// Lattice height for both orbit and chord enumeration.
    #[arg(long, global = true, env = "TORIC_CHORDS_HEIGHT")]
    height: Option<i64>,
    #[arg(long, global = true, env = "TORIC_CHORDS_THREADS")]
    threads: Option<usize>,
    /// Emit the JSON report (the default unless --csv is given alone).
    #[arg(long, global = true)]
    json: bool,
    /// Write CSV tables.
    #[arg(long, global = true)]
    csv: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Gromov width, cube capacity and their gap.
    Capacities,
    /// Closed Reeb orbits on rational torus fibers.
    Orbits,
    /// Reeb chords of a Legendrian fiber torus.
    Chords,
    /// Check every capacity identity on the configured domain.
    Verify,
    /// Chord search on seeded perturbations of the domain.
    PerturbStudy,
    /// Verify the non-monotone counterexample domain.
    Counterexample {
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// Write plot-ready CSV tables.
    PlotData,
}

fn load(cli: &Cli) -> Result<(CommandKind, RunConfig), CliError> {
    let mut config = match &cli.global.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let g = &cli.global;
    config.apply(&Overrides {
        out: g.out.clone(),
        seed: g.seed,
        height: g.height,
        threads: g.threads,
        json: g.json,
        csv: g.csv,
    });
    let kind = match &cli.command {
        Command::Capacities => CommandKind::Capacities,
        Command::Orbits => CommandKind::Orbits,
        Command::Chords => CommandKind::Chords,
        Command::Verify => CommandKind::Verify,
        Command::PerturbStudy => CommandKind::PerturbStudy,
        Command::PlotData => CommandKind::PlotData,
        Command::Counterexample { epsilon } => {
            if let Some(eps) = *epsilon {
                config.domain = match config.domain {
                    Shape::Counterexample { beta, q, .. } => Shape::Counterexample { epsilon: eps, beta, q },
                    _ => Shape::Counterexample { epsilon: eps, beta: 200.0, q: 16.0 },
                };
            }
            CommandKind::Counterexample
        }
    };
    Ok((kind, config))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = load(&cli).and_then(|(kind, config)| {
        let outcome = run::run(kind, &config)?;
        run::emit(kind, &outcome, &outcome.envelope.config)?;
        Ok(outcome.exit_code)
    });
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("toric-chords: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
