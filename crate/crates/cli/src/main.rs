//! `disorder-rmt`: batch runner for the estimators and oracles.
//!
//! Exit codes: 0 success, 2 validation error, 3 numerical failure.

mod config;
mod error;
mod report;
mod run;

use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;

use config::{resolve, Common};
use error::CliError;

#[derive(Parser, Debug)]
#[command(name = "disorder-rmt", version, about = "Random matrix products and 1-D disordered systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Lyapunov exponent from the growth of a vector norm.
    Lyapunov(With<run::LyapunovArgs>),
    /// Lyapunov exponent from the stationary projective chain.
    Furstenberg(With<run::FurstenbergArgs>),
    /// Strong irreducibility of the support of the model.
    Irreducible(With<run::IrreducibleArgs>),
    /// Integrated density of states by node counting on a grid.
    Ids(With<run::GridArgs>),
    /// Complex Lyapunov exponent on a grid.
    Omega(With<run::GridArgs>),
    /// Mean half-line Weyl coefficient from the continued fraction.
    Weyl(With<run::WeylArgs>),
    /// Stationary histogram of the Riccati variable.
    RiccatiHist(With<run::HistArgs>),
    /// White-noise Riccati diffusion.
    Sde(With<run::SdeArgs>),
    /// First-passage law of the ground state.
    Groundstate(With<run::GroundArgs>),
    /// Transmission decay and reflexion phase.
    Scatter(With<run::ScatterArgs>),
    /// Free energy of the random-field Ising chain.
    Ising(With<run::IsingArgs>),
    /// Closed-form oracle values.
    Oracle(With<run::OracleArgs>),
    /// Runs the acceptance criteria.
    Selftest(With<run::SelftestArgs>),
}

#[derive(clap::Args, Debug)]
struct With<A: clap::Args> {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    args: A,
}

fn go<A, F>(name: &str, w: &With<A>, f: F) -> Result<(), CliError>
where
    A: clap::Args + Serialize + DeserializeOwned,
    F: FnOnce(config::Resolved<A>) -> Result<(), CliError>,
{
    f(resolve(name, &w.common, &w.args)?)
}

fn threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("DISORDER_RMT_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Validation(format!("DISORDER_RMT_THREADS must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Validation(e.to_string()))
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = threads().and_then(|_| match &cli.command {
        Command::Lyapunov(w) => go("lyapunov", w, run::lyapunov),
        Command::Furstenberg(w) => go("furstenberg", w, run::furstenberg),
        Command::Irreducible(w) => go("irreducible", w, run::irreducible),
        Command::Ids(w) => go("ids", w, run::ids),
        Command::Omega(w) => go("omega", w, run::omega),
        Command::Weyl(w) => go("weyl", w, run::weyl),
        Command::RiccatiHist(w) => go("riccati-hist", w, run::riccati_hist),
        Command::Sde(w) => go("sde", w, run::sde),
        Command::Groundstate(w) => go("groundstate", w, run::groundstate),
        Command::Scatter(w) => go("scatter", w, run::scatter),
        Command::Ising(w) => go("ising", w, run::ising),
        Command::Oracle(w) => go("oracle", w, run::oracle),
        Command::Selftest(w) => go("selftest", w, run::selftest),
    });
    if let Err(e) = result {
        eprintln!("disorder-rmt: {e}");
        std::process::exit(e.exit_code());
    }
}
