use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use coharray_bench::runner::execute;
use coharray_bench::spec::{
    parse_config_file, parse_size, resolve, Algorithm, ExperimentKind, Overrides,
};
use coharray_bench::Result;

/// Antenna-placement benchmark runner: seeded Monte-Carlo experiments over
/// the deterministic and randomized placement algorithms, written as CSV.
#[derive(Debug, Parser)]
#[command(name = "coharray", version, disable_help_subcommand = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sweep the elimination budget p (coherence against p).
    SweepP(CommonArgs),
    /// Sweep the array size M=N for each algorithm.
    SweepSize(CommonArgs),
    /// Record the per-iteration grid dimensionality of the eliminating
    /// algorithm.
    Trace(CommonArgs),
    /// Mean coherence and runtime per algorithm and p.
    Table1(CommonArgs),
    /// Exhaustive minimum-coherence placement for small instances.
    Oracle(CommonArgs),
    /// One-off runs of the selected algorithms.
    Single(CommonArgs),
}

impl Command {
    fn kind(&self) -> ExperimentKind {
        match self {
            Command::SweepP(_) => ExperimentKind::SweepP,
            Command::SweepSize(_) => ExperimentKind::SweepSize,
            Command::Trace(_) => ExperimentKind::Trace,
            Command::Table1(_) => ExperimentKind::Table1,
            Command::Oracle(_) => ExperimentKind::Oracle,
            Command::Single(_) => ExperimentKind::Single,
        }
    }

    fn args(&self) -> &CommonArgs {
        match self {
            Command::SweepP(a)
            | Command::SweepSize(a)
            | Command::Trace(a)
            | Command::Table1(a)
            | Command::Oracle(a)
            | Command::Single(a) => a,
        }
    }
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Number of direction grid points.
    #[arg(long)]
    g: Option<usize>,
    /// Transmit candidate grid size.
    #[arg(long)]
    mtilde: Option<usize>,
    /// Receive candidate grid size.
    #[arg(long)]
    ntilde: Option<usize>,
    /// Number of transmit antennas.
    #[arg(long)]
    m: Option<usize>,
    /// Number of receive antennas.
    #[arg(long)]
    n: Option<usize>,
    /// Elimination budget; repeatable for sweeps.
    #[arg(long = "p")]
    p: Vec<f64>,
    /// Array size M=N (or MxN); repeatable for sweep-size.
    #[arg(long = "size")]
    size: Vec<String>,
    /// Seeded runs per cell.
    #[arg(long)]
    runs: Option<usize>,
    /// Base seed; run i uses seed base+i.
    #[arg(long)]
    seed: Option<u64>,
    /// Algorithm (riap, riap-expurgated, diap); repeatable.
    #[arg(long = "algo")]
    algo: Vec<String>,
    /// Expurgation draws for riap-expurgated.
    #[arg(long)]
    draws: Option<usize>,
    /// Flat key=value config file; CLI flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV path.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl CommonArgs {
    fn overrides(&self) -> Result<Overrides> {
        let algorithms = if self.algo.is_empty() {
            None
        } else {
            Some(
                self.algo
                    .iter()
                    .map(|s| s.parse::<Algorithm>())
                    .collect::<Result<Vec<_>>>()?,
            )
        };
        let size_values = if self.size.is_empty() {
            None
        } else {
            Some(
                self.size
                    .iter()
                    .map(|s| parse_size(s))
                    .collect::<Result<Vec<_>>>()?,
            )
        };
        Ok(Overrides {
            g: self.g,
            m_tilde: self.mtilde,
            n_tilde: self.ntilde,
            m: self.m,
            n: self.n,
            p_values: (!self.p.is_empty()).then(|| self.p.clone()),
            size_values,
            runs: self.runs,
            base_seed: self.seed,
            algorithms,
            expurgation_draws: self.draws,
            output_path: self.out.clone(),
        })
    }
}

fn run(cli: Cli) -> Result<()> {
    let args = cli.command.args();
    let mut overrides = Overrides::default();
    if let Some(path) = &args.config {
        overrides = overrides.merged_with(parse_config_file(path)?);
    }
    overrides = overrides.merged_with(args.overrides()?);
    let spec = resolve(cli.command.kind(), overrides)?;
    execute(&spec)?;
    eprintln!("wrote {}", spec.output_path.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // clap prints its own message; exit code 1 covers bad arguments
            let _ = err.print();
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
