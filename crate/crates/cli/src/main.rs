#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;
mod output;
mod plot;

use clap::{Parser, Subcommand};
use config::RunConfig;
use error::CliError;
use output::OutputDir;
use std::path::PathBuf;
use std::process::ExitCode;

/// Spectra of Dirac operators with infinite-mass boundary conditions and
/// their large-mass approximations.
///
/// Exit codes: 0 success, 1 I/O failure, 2 invalid configuration or input,
/// 3 numerical failure (including non-convergence), 4 failed checks.
#[derive(Parser, Debug)]
#[command(name = "infmass", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML run configuration; built-in defaults are used when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Directory receiving the results.
    #[arg(long, global = true, value_name = "DIR", default_value = "results")]
    out: PathBuf,

    /// Worker threads for independent solves (defaults to the available cores).
    #[arg(long, global = true, value_name = "N")]
    workers: Option<usize>,

    /// Overrides the solver seed and the random-field seed.
    #[arg(long, global = true, value_name = "S")]
    seed: Option<u64>,

    /// Overrides the solver tolerance (spectrum, sweep) or the check tolerance
    /// (verify-forms, verify-lemma).
    #[arg(long, global = true, value_name = "X")]
    tol: Option<f64>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Infinite-mass spectrum (and finite-mass, when configured) with provenance.
    Spectrum,
    /// Finite-mass spectra over the mass list with convergence diagnostics.
    Sweep,
    /// Boundary algebra and quadratic-form identities on random fields.
    VerifyForms,
    /// One-dimensional variational lower bound.
    VerifyLemma,
    /// Markdown summary of the results found in the output directory.
    Report,
}

fn resolve(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.solver.seed = seed;
        config.forms.seed = seed;
    }
    if let Some(tol) = cli.tol {
        match cli.command {
            Command::Spectrum | Command::Sweep => config.solver.tolerance = tol,
            Command::VerifyForms => config.forms.tolerance = tol,
            Command::VerifyLemma => config.lemma.tolerance = tol,
            Command::Report => {}
        }
    }
    config.validate().map_err(|e| {
        CliError::Config(format!("after command-line overrides: `{}.{}` {}", e.section, e.key, e.message))
    })?;
    Ok(config)
}

fn execute(cli: &Cli) -> Result<String, CliError> {
    let config = resolve(cli)?;
    let mut out = OutputDir::create(&cli.out, &config.hash())?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(workers) = cli.workers {
        if workers == 0 {
            return Err(CliError::Config("--workers must be at least 1".into()));
        }
        pool = pool.num_threads(workers);
    }
    let pool = pool.build().map_err(|e| CliError::Config(format!("cannot start worker pool: {e}")))?;
    let mut summary = pool.install(|| match cli.command {
        Command::Spectrum => commands::spectrum::run(&config, &mut out),
        Command::Sweep => commands::sweep::run(&config, &mut out),
        Command::VerifyForms => commands::verify::run_forms(&config, &mut out),
        Command::VerifyLemma => commands::verify::run_lemma(&config, &mut out),
        Command::Report => commands::report::run(&mut out),
    })?;
    summary.push_str(&format!("{} file(s) in {} (config {})\n", out.written().len(), cli.out.display(), out.config_hash()));
    Ok(summary)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(summary) => {
            print!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
