//! `qkrylov`: Lanczos coefficients, recursion-method autocorrelations and
//! operator equivalence classes for qudit lattice models.
//!
//! Exit codes: 0 success, 1 a verify suite failed, 2 configuration error,
//! 3 budget or cap exceeded (partial output written), 4 internal error,
//! 5 unphysical extrapolation.

mod commands;
mod config;
mod output;
mod verify;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qudit_krylov::recursion::FitForm;
use qudit_krylov::{Error, SpinValue};

use config::{parse_list, BoundaryKind, Command, Coupling, ModelKind, RunConfig, Sites};

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn config(message: impl fmt::Display) -> Self {
        Failure {
            code: 2,
            message: message.to_string(),
        }
    }

    pub fn budget(message: impl fmt::Display) -> Self {
        Failure {
            code: 3,
            message: message.to_string(),
        }
    }

    pub fn internal(message: impl fmt::Display) -> Self {
        Failure {
            code: 4,
            message: message.to_string(),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::InvalidModel(_)
            | Error::Parse(_)
            | Error::NotHermitian(_)
            | Error::ZeroOperator
            | Error::NotEnoughCoefficients { .. }
            | Error::TooFewPoints { .. }
            | Error::BadTimeGrid
            | Error::BoundaryReflection { .. }
            | Error::UnsupportedMode
            | Error::DenseCapExceeded { .. }
            | Error::WindowMissesSite(_)
            | Error::InvalidString(_)
            | Error::IdentityAnchor
            | Error::DimensionMismatch { .. }
            | Error::ModeMismatch { .. }
            | Error::Snapshot(_) => 2,
            Error::CapHit { .. } => 3,
            Error::UnphysicalExtrapolation { .. } => 5,
            Error::FitNotConverged | Error::Internal(_) | Error::Io(_) => 4,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::internal(e)
    }
}

#[derive(Parser)]
#[command(name = "qkrylov", version, about = "Operator growth in qudit lattice models")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Lanczos coefficients b_n of the total magnetization; writes bn.json, bn.csv, bn.dat.
    Lanczos(Flags),
    /// Fit, extrapolate and integrate the chain for C(t); writes ct.csv, ct.dat, fit.json.
    Autocorr(Flags),
    /// Fit b_n only; writes fit.json and fit.dat.
    Fit(Flags),
    /// Equivalence classes and operator evolution dimension of a seed; writes oed.json.
    Oed(Flags),
    /// Exact evolution of a seed inside its equivalence class; writes class.json, class_ct.csv, class_ct.dat.
    EvolveClass(Flags),
    /// Run the oracle cross-checks and print one line per check.
    Verify(Flags),
}

#[derive(Args, Default)]
struct Flags {
    /// Config file; flags given on the command line override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write the resolved config here and continue.
    #[arg(long)]
    save_config: Option<PathBuf>,

    #[arg(long, value_enum)]
    model: Option<ModelKind>,
    /// 1/2, 1, 3/2, ...
    #[arg(long)]
    spin: Option<SpinValue>,
    /// Exchange coupling, or `auto` for 1/sqrt(S(S+1)).
    #[arg(long = "J")]
    j: Option<Coupling>,
    #[arg(long)]
    hx: Option<f64>,
    #[arg(long)]
    hz: Option<f64>,
    /// Local dimension of the Potts and Kitaev-Potts chains.
    #[arg(long)]
    d: Option<u8>,
    /// Potts transverse field.
    #[arg(long)]
    h: Option<f64>,
    /// Kitaev-Potts X-bond couplings, comma-separated.
    #[arg(long)]
    jx: Option<String>,
    /// Kitaev-Potts Z-bond couplings, comma-separated.
    #[arg(long)]
    jy: Option<String>,
    /// `inf`, a site count, or `LxW`.
    #[arg(long)]
    sites: Option<Sites>,
    #[arg(long, value_enum)]
    boundary: Option<BoundaryKind>,
    /// Keep the Kitaev-Potts bonds without their Hermitian conjugates.
    #[arg(long)]
    no_hc: bool,

    /// Number of Lanczos coefficients.
    #[arg(long)]
    n: Option<usize>,
    /// Cap on stored strings across the two live Lanczos vectors.
    #[arg(long)]
    budget: Option<usize>,
    /// Write the final Lanczos state to this snapshot file.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Continue from a snapshot written by `--checkpoint`.
    #[arg(long)]
    resume: Option<PathBuf>,

    /// Fit form: linear_log or sqrt.
    #[arg(long)]
    fit: Option<FitForm>,
    #[arg(long)]
    n_min: Option<usize>,
    #[arg(long)]
    n_fit_max: Option<usize>,
    /// Chain length after extrapolation.
    #[arg(long)]
    n_total: Option<usize>,
    /// Integrate the measured coefficients only.
    #[arg(long)]
    no_extrapolation: bool,
    #[arg(long)]
    tmax: Option<f64>,
    /// Number of time steps on [0, tmax].
    #[arg(long)]
    steps: Option<usize>,

    /// `Z@i`, `X@i`, `X2Z1@i` (1-based site) or a full string `d=3; (0):X0Z1`.
    #[arg(long)]
    seed: Option<String>,
    /// Stop class exploration past this many strings.
    #[arg(long)]
    cap: Option<usize>,
    /// Write the reachable strings, one per line.
    #[arg(long)]
    inventory: Option<PathBuf>,
    /// Write the class generator in MatrixMarket coordinate format.
    #[arg(long)]
    generator: Option<PathBuf>,

    /// bn.json produced by `lanczos`.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Cap on worker threads.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    rng_seed: Option<u64>,
    /// Verify suite: all, algebra, lanczos-oracle, recursion-oracle, fragmentation-oracle.
    #[arg(long)]
    suite: Option<String>,
    /// Add this offset to one computed coefficient before comparing (sensitivity check).
    #[arg(long, hide = true)]
    perturb: Option<f64>,
}

impl Flags {
    fn resolve(&self, command: Command) -> Result<RunConfig, Failure> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text =
                    std::fs::read_to_string(path).map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
                let mut cfg = RunConfig::from_ini_str(&text)?;
                cfg.command = command;
                cfg
            }
            None => RunConfig::new(command),
        };
        let m = &mut cfg.model;
        macro_rules! take {
            ($slot:expr, $flag:expr) => {
                if let Some(v) = $flag.clone() {
                    $slot = v;
                }
            };
        }
        take!(m.model, self.model);
        take!(m.spin, self.spin);
        take!(m.j, self.j);
        take!(m.hx, self.hx);
        take!(m.hz, self.hz);
        take!(m.d, self.d);
        take!(m.h, self.h);
        if let Some(v) = &self.jx {
            m.jx = parse_list(v)?;
        }
        if let Some(v) = &self.jy {
            m.jy = parse_list(v)?;
        }
        take!(m.sites, self.sites);
        take!(m.boundary, self.boundary);
        if self.no_hc {
            m.hc = false;
        }
        take!(cfg.n_max, self.n);
        take!(cfg.budget, self.budget);
        if self.checkpoint.is_some() {
            cfg.checkpoint = self.checkpoint.clone();
        }
        if self.resume.is_some() {
            cfg.resume = self.resume.clone();
        }
        take!(cfg.fit, self.fit);
        take!(cfg.fit_n_min, self.n_min);
        if self.n_fit_max.is_some() {
            cfg.fit_n_max = self.n_fit_max;
        }
        take!(cfg.n_total, self.n_total);
        if self.no_extrapolation {
            cfg.extrapolate = false;
        }
        take!(cfg.t_max, self.tmax);
        take!(cfg.steps, self.steps);
        take!(cfg.seed, self.seed);
        take!(cfg.cap, self.cap);
        if self.inventory.is_some() {
            cfg.inventory = self.inventory.clone();
        }
        if self.generator.is_some() {
            cfg.generator = self.generator.clone();
        }
        take!(cfg.input, self.input);
        take!(cfg.out, self.out);
        if self.threads.is_some() {
            cfg.threads = self.threads;
        }
        take!(cfg.rng_seed, self.rng_seed);
        take!(cfg.suite, self.suite);
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let (command, flags) = match cli.command {
        Sub::Lanczos(f) => (Command::Lanczos, f),
        Sub::Autocorr(f) => (Command::Autocorr, f),
        Sub::Fit(f) => (Command::Fit, f),
        Sub::Oed(f) => (Command::Oed, f),
        Sub::EvolveClass(f) => (Command::EvolveClass, f),
        Sub::Verify(f) => (Command::Verify, f),
    };
    let cfg = flags.resolve(command)?;
    if let Some(path) = &flags.save_config {
        std::fs::write(path, cfg.to_ini_string())?;
    }
    if let Some(n) = cfg.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(Failure::internal)?;
    }
    match command {
        Command::Lanczos => commands::lanczos(&cfg),
        Command::Autocorr => commands::autocorr(&cfg),
        Command::Fit => commands::fit(&cfg),
        Command::Oed => commands::oed(&cfg),
        Command::EvolveClass => commands::evolve_class(&cfg),
        Command::Verify => verify::run(&cfg, flags.perturb.unwrap_or(0.0)),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("qkrylov: {f}");
            ExitCode::from(f.code)
        }
    }
}
