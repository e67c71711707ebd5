use std::io::Write as _;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use heckelab::Error;

mod commands;
mod config;

use config::{GlobalOpts, RunConfig};

/// Hecke eigenforms of level one: bases, L-values, moments and verification suites.
#[derive(Parser, Debug)]
#[command(name = "heckelab", version)]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Victor–Miller basis of S_k.
    Basis { k: u32, n: Option<usize> },
    /// Hecke eigenbasis of S_k with normalized eigenvalues and Satake angles.
    Eigenforms { k: u32, n: Option<usize> },
    /// L(1, sym² f) for each eigenform by series and by the norm relation.
    Lvalues { k: u32 },
    /// First-moment report for the pair (f, g).
    Moment { k: u32, l: u32, f_index: usize, g_index: usize },
    /// Run a verification suite, or `all`.
    Verify { suite: String },
    /// Partial sums over primes: sym2_over_p, sym4_over_p or rankin_pair.
    Primesum {
        k: u32,
        f_index: usize,
        kind: String,
        x_max: u64,
        /// Second eigenform of S_k for rankin_pair (default: f itself).
        #[arg(long = "with")]
        g_index: Option<usize>,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InsufficientPrecision(_) => 3,
        Error::InvalidWeight(_) | Error::InvalidInput(_) | Error::UnsupportedRange(_) => 2,
        _ => 1,
    }
}

fn run(cli: Cli) -> Result<bool, Error> {
    let config = RunConfig::resolve(&cli.global)?;
    if let Some(n) = config.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("thread pool already configured: {e}");
        }
    }
    log::debug!("{config:?}");
    let out = match cli.command {
        Command::Basis { k, n } => commands::basis(&config, k, n)?,
        Command::Eigenforms { k, n } => commands::eigenforms(&config, k, n)?,
        Command::Lvalues { k } => commands::lvalues(&config, k)?,
        Command::Moment { k, l, f_index, g_index } => commands::moment(&config, k, l, f_index, g_index)?,
        Command::Verify { suite } => commands::verify(&config, &suite)?,
        Command::Primesum { k, f_index, kind, x_max, g_index } => {
            commands::primesum(&config, k, f_index, &kind, x_max, g_index)?
        }
    };
    let mut text = out.text;
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match &config.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", path.display())))?,
        None => {
            let _ = std::io::stdout().lock().write_all(text.as_bytes());
        }
    }
    Ok(out.passed)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
