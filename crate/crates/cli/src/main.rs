//! `elasticity`: verification campaigns for the elasticity complex.
//!
//! Exit codes: 0 when every check passes, 1 on a verification failure, 2 on a
//! usage or configuration error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use elasticity_core::elasticity_assembly::BoundarySelection;
use elasticity_core::identity_suite::registry_json;
use elasticity_core::reports::{run, Command, Format, RunConfig, WeightMode};
use elasticity_core::Error;

#[derive(Parser)]
#[command(name = "elasticity", version, about = "Exact and numerical checks of the elasticity complex on the unit box")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Check every operator identity on random exact polynomial samples.
    VerifyIdentities(Opts),
    /// Assemble the discrete complex and report its structure.
    Complex(Opts),
    /// Run the toolbox suite on a complex stored as JSON.
    Fixture {
        /// Fixture file (same as --fixture).
        path: Option<PathBuf>,
        #[command(flatten)]
        opts: Opts,
    },
    /// Helmholtz decompositions of random fields.
    Helmholtz(Opts),
    /// Poincare constants, their sharpness and the mixed estimate.
    Poincare(Opts),
    /// Discrete Korn constants.
    Korn(Opts),
    /// Print the identity registry as JSON.
    ListIdentities,
}

#[derive(Clone, Copy, ValueEnum)]
enum WeightsArg {
    Identity,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Args, Default)]
struct Opts {
    /// JSON config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Per-variable polynomial degree (lowest one of a sweep).
    #[arg(long)]
    p: Option<u32>,
    /// Upper end of a degree sweep.
    #[arg(long)]
    p_max: Option<u32>,
    /// Faces with essential conditions: `none`, `all` or e.g. `X0,Y1`.
    #[arg(long)]
    gt: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Degree bound of random polynomials in the identity suite.
    #[arg(long)]
    degree: Option<u32>,
    #[arg(long, value_enum)]
    weights: Option<WeightsArg>,
    /// Relative rank threshold.
    #[arg(long)]
    tol_rank: Option<f64>,
    #[arg(long)]
    check_tol: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    /// Space index for `helmholtz`.
    #[arg(long)]
    level: Option<usize>,
    /// Restrict to these identity ids (repeatable or comma separated).
    #[arg(long, value_delimiter = ',')]
    only: Vec<String>,
    /// Perturb one coefficient per identity; passes when every case fails.
    #[arg(long)]
    mutate: bool,
    #[arg(long)]
    fixture: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

fn config_from(opts: &Opts) -> Result<RunConfig, Error> {
    let mut cfg = match &opts.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    if let Some(v) = opts.p {
        cfg.p = v;
    }
    if let Some(v) = opts.p_max {
        cfg.p_max = Some(v);
    }
    if let Some(v) = &opts.gt {
        cfg.gt = v.parse::<BoundarySelection>()?;
    }
    if let Some(v) = opts.seed {
        cfg.seed = v;
    }
    if let Some(v) = opts.trials {
        cfg.trials = v;
    }
    if let Some(v) = opts.degree {
        cfg.degree = v;
    }
    if let Some(v) = opts.weights {
        cfg.weights = match v {
            WeightsArg::Identity => WeightMode::Identity,
            WeightsArg::Random => WeightMode::RandomSpd,
        };
    }
    if let Some(v) = opts.tol_rank {
        cfg.tol_rank = Some(v);
    }
    if let Some(v) = opts.check_tol {
        cfg.check_tol = v;
    }
    if let Some(v) = opts.samples {
        cfg.samples = v;
    }
    if let Some(v) = opts.level {
        cfg.level = v;
    }
    if !opts.only.is_empty() {
        cfg.only = opts.only.clone();
    }
    if opts.mutate {
        cfg.mutate = true;
    }
    if let Some(v) = &opts.fixture {
        cfg.fixture = Some(v.display().to_string());
    }
    if let Some(v) = &opts.out {
        cfg.out = Some(v.display().to_string());
    }
    if let Some(v) = opts.format {
        cfg.format = match v {
            FormatArg::Json => Format::Json,
            FormatArg::Csv => Format::Csv,
        };
    }
    Ok(cfg)
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::DegreeTooLow(_) | Error::UnknownIdentity(_) | Error::Io(_) | Error::Json(_) => 2,
        _ => 1,
    }
}

fn execute(cmd: Command, opts: &Opts) -> Result<bool, Error> {
    let cfg = config_from(opts)?;
    let outcome = run(cmd, &cfg)?;
    let text = outcome.render(cfg.format);
    match &cfg.out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::Config(format!("cannot write {path}: {e}")))?,
        None => print!("{text}"),
    }
    for d in &outcome.diagnostics {
        eprintln!("FAIL {d}");
    }
    Ok(outcome.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cmd, mut opts) = match cli.verb {
        Verb::ListIdentities => {
            print!("{}", registry_json());
            return ExitCode::SUCCESS;
        }
        Verb::VerifyIdentities(o) => (Command::VerifyIdentities, o),
        Verb::Complex(o) => (Command::Complex, o),
        Verb::Fixture { path, opts } => (Command::Fixture, Opts { fixture: opts.fixture.clone().or(path), ..opts }),
        Verb::Helmholtz(o) => (Command::Helmholtz, o),
        Verb::Poincare(o) => (Command::Poincare, o),
        Verb::Korn(o) => (Command::Korn, o),
    };
    if cmd == Command::Korn && opts.p.is_none() && opts.config.is_none() {
        // Korn makes sense from p = 2 on
        opts.p = Some(2);
    }
    match execute(cmd, &opts) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
