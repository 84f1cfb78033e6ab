use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sbchain::experiment::{self, ExperimentConfig, Scenario};
use sbchain::Error;

#[derive(Parser)]
#[command(name = "sbchain", version, about = "Qubit coupled to a discretized transmission line, simulated with MPS")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ground states and photon profiles.
    Ground(RunArgs),
    /// Spontaneous emission of an excited qubit.
    Emit(RunArgs),
    /// Wavepacket transmission through the qubit.
    Scatter(RunArgs),
    /// Stationary response to a small bias.
    Susceptibility(RunArgs),
    /// Flux-qubit coupling versus junction ratio.
    Circuit(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides out_dir).
    #[arg(long)]
    out: Option<String>,
    /// Worker threads for grid scans.
    #[arg(long)]
    threads: Option<usize>,
    /// Maximum bond dimension.
    #[arg(long)]
    chi: Option<usize>,
    /// Time step.
    #[arg(long)]
    dt: Option<f64>,
}

impl Command {
    fn split(self) -> (Scenario, RunArgs) {
        match self {
            Command::Ground(a) => (Scenario::Ground, a),
            Command::Emit(a) => (Scenario::Emit, a),
            Command::Scatter(a) => (Scenario::Scatter, a),
            Command::Susceptibility(a) => (Scenario::Susceptibility, a),
            Command::Circuit(a) => (Scenario::Circuit, a),
        }
    }
}

fn load(scenario: Scenario, args: &RunArgs) -> Result<ExperimentConfig, Error> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| Error::config(0, format!("cannot read {}: {e}", args.config.display())))?;
    let mut cfg = experiment::parse_config(&text)?;
    if cfg.scenario != scenario {
        return Err(Error::config(0, format!("config is for '{}', not '{scenario}'", cfg.scenario)));
    }
    if let Some(out) = &args.out {
        cfg.out_dir = out.clone();
    }
    if let Some(t) = args.threads {
        cfg.threads = t;
    }
    if let Some(c) = args.chi {
        cfg.numerics.chi_max = c;
    }
    if let Some(dt) = args.dt {
        cfg.numerics.dt = dt;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let (scenario, args) = Cli::parse().command.split();
    let result = load(scenario, &args).and_then(|cfg| {
        let rec = experiment::run(&cfg)?;
        let dir = rec.write()?;
        Ok((rec, dir))
    });
    match result {
        Ok((rec, dir)) => {
            for (k, v) in &rec.scalars {
                log::info!("{k} = {v}");
            }
            println!("{}", dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(experiment::exit_code(&e) as u8)
        }
    }
}
