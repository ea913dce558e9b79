use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use landau_cli::{check_experiment, run, summary, validate, RunConfig, DEFAULT_SEED, EXPERIMENTS};

#[derive(Parser)]
#[command(name = "landau", version, about = "Localization experiments for 2D Landau Hamiltonians with random potentials")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML file with one table per experiment.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Master seed (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory for JSON and CSV reports.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Parameter override, `field=value` or `experiment.field=value`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand, Clone)]
enum Command {
    /// Rectangle crossing probabilities and their decay in ℓ.
    PercCrossing,
    /// Closed circuits in annuli against the crossing bound.
    PercCircuit,
    /// Ribbons around occupied circuits.
    Ribbon,
    /// Landau projector kernels: identities, HS decay, trace norms.
    Projector,
    /// Wegner estimate scaling in δ and |Λ|.
    Wegner,
    /// Integrated density of states and its modulus at the Landau level.
    Ids,
    /// Leakage of band spectral projectors out of the lowest level.
    BandProjection,
    /// Exponential decay of the localized resolvent.
    Decay,
    /// Initial-scale resolvent event at the band edge and at E = B.
    H1,
    /// Spectral averaging bound on random matrices.
    SpectralAveraging,
    /// ‖P₀ V Q₀‖ as a function of B.
    Offdiag,
    /// Every experiment in turn.
    All,
    #[command(external_subcommand)]
    Other(Vec<String>),
}

impl Command {
    fn name(&self) -> Result<Option<&'static str>> {
        Ok(Some(match self {
            Command::PercCrossing => "perc-crossing",
            Command::PercCircuit => "perc-circuit",
            Command::Ribbon => "ribbon",
            Command::Projector => "projector",
            Command::Wegner => "wegner",
            Command::Ids => "ids",
            Command::BandProjection => "band-projection",
            Command::Decay => "decay",
            Command::H1 => "h1",
            Command::SpectralAveraging => "spectral-averaging",
            Command::Offdiag => "offdiag",
            Command::All => return Ok(None),
            Command::Other(args) => {
                check_experiment(&args[0])?;
                unreachable!("known experiments have their own subcommand")
            }
        }))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match drive(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn drive(cli: Cli) -> Result<bool> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let selected = cli.command.name()?;
    for s in &cli.set {
        cfg.set(s, selected)?;
    }
    let names: Vec<&str> = match selected {
        Some(n) => vec![n],
        None => EXPERIMENTS.to_vec(),
    };
    for n in &names {
        validate(n, &cfg)?;
    }
    let seed = cli.seed.or(cfg.seed).unwrap_or(DEFAULT_SEED);
    let out = cli.out.clone().or(cfg.out.clone()).unwrap_or_else(|| PathBuf::from("reports"));
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cli.jobs.or(cfg.jobs) {
        pool = pool.num_threads(j);
    }
    let pool = pool.build().context("building the worker pool")?;

    let mut all_pass = true;
    for n in names {
        let report = pool.install(|| run(n, &cfg, seed))?;
        let paths = report.write(&out).with_context(|| format!("writing reports to {}", out.display()))?;
        print!("{}", summary(&report));
        println!("{:<18} wrote {} files to {} in {:.1} s", n, paths.len(), out.display(), report.wall_clock_s);
        all_pass &= report.passed();
    }
    Ok(all_pass)
}
