use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use calderon_lab::config::ExperimentConfig;
use calderon_lab::runner;

#[derive(Parser)]
#[command(name = "calderon-lab", version, about = "Numerical laboratory for a Clifford-analysis route to 3D electrical impedance imaging")]
struct Cli {
    /// TOML configuration file; defaults apply for missing keys
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Override one configuration key (repeatable)
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Random-case checks of the algebra laws
    VerifyAlgebra,
    /// Convergence and exactness checks of the discrete calculus and the
    /// exponential family
    VerifyOperators,
    /// Conjugate-potential construction against manufactured oracles
    Conjugate,
    /// Integrand identity and the boundary-pairing vs volume-integral match
    Alessandrini,
    /// Exponential-substitution identity residuals and the form discrepancy
    CgoResidual,
    /// Linearized reconstruction of an interior perturbation
    Linrecon {
        /// "gaussian" or a path to a scalar grid dump
        #[arg(long)]
        scenario: Option<String>,
        /// Spectrum lattice cutoff
        #[arg(long = "K")]
        k: Option<i32>,
        /// "volume", "dtn", or "both"
        #[arg(long)]
        route: Option<String>,
    },
}

fn run(cli: Cli) -> calderon_lab::Result<bool> {
    let mut cfg = ExperimentConfig::load(cli.config.as_deref(), &cli.set)?;
    if let Command::Linrecon { scenario, k, route } = &cli.command {
        if let Some(s) = scenario {
            cfg.scenario = s.clone();
        }
        if let Some(k) = k {
            cfg.k_cut = *k;
        }
        if let Some(r) = route {
            cfg.route = r.clone();
        }
    }
    cfg.validate()?;
    let out = cfg.resolve_out_dir();
    std::fs::create_dir_all(&out)?;
    match cli.command {
        Command::VerifyAlgebra => runner::verify_algebra(&cfg, &out),
        Command::VerifyOperators => runner::verify_operators(&cfg, &out),
        Command::Conjugate => runner::conjugate(&cfg, &out),
        Command::Alessandrini => runner::alessandrini(&cfg, &out),
        Command::CgoResidual => runner::cgo_residual(&cfg, &out),
        Command::Linrecon { .. } => runner::linrecon(&cfg, &out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
