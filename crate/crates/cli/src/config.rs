//! Resolved run configuration and its INI form.
//!
//! ```ini
//! command = lanczos
//!
//! [model]
//! model = ising1d        ; ising1d | ising2d | potts | kitaev-potts
//! spin = 1               ; 1/2, 1, 3/2, ...
//! J = auto               ; number, or auto = 1/sqrt(S(S+1))
//! hx = 1
//! hz = 1
//! d = 3
//! h = 1
//! jx = 1                 ; comma-separated, cycled over bonds
//! jy = 1
//! sites = inf            ; inf, N, or LxW for the square lattice
//! boundary = ring        ; ring | open
//! hc = true
//!
//! [lanczos]
//! n = 12
//! budget = 200000000
//! checkpoint =
//! resume =
//!
//! [fit]
//! form = linear_log
//! n_min = 2
//! n_max =
//! n_total = 400
//! extrapolate = true
//!
//! [time]
//! tmax = 5
//! steps = 200
//!
//! [oed]
//! seed = Z@1
//! cap = 100000000
//! inventory =
//! generator =
//!
//! [io]
//! input = bn.json
//! out = .
//!
//! [run]
//! threads =
//! rng_seed = 0
//! suite = all
//! ```
//!
//! Empty values mean "unset". Floats are written in shortest round-trip
//! form, so `write → parse` is lossless.

use std::fmt;
use std::hash::Hasher;
use std::path::PathBuf;
use std::str::FromStr;

use ini::Ini;
use qudit_krylov::fragmentation::DEFAULT_CAP;
use qudit_krylov::lanczos::DEFAULT_BUDGET;
use qudit_krylov::recursion::{FitForm, DEFAULT_N_MIN, DEFAULT_N_TOTAL};
use qudit_krylov::{coupling_convention, Extent, LatticeSpec, ModelSpec, SpinValue};
use rustc_hash::FxHasher;

use crate::Failure;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Lanczos,
    Autocorr,
    Fit,
    Oed,
    EvolveClass,
    Verify,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Lanczos => "lanczos",
            Command::Autocorr => "autocorr",
            Command::Fit => "fit",
            Command::Oed => "oed",
            Command::EvolveClass => "evolve-class",
            Command::Verify => "verify",
        }
    }
}

impl FromStr for Command {
    type Err = Failure;
    fn from_str(s: &str) -> Result<Self, Failure> {
        Ok(match s {
            "lanczos" => Command::Lanczos,
            "autocorr" => Command::Autocorr,
            "fit" => Command::Fit,
            "oed" => Command::Oed,
            "evolve-class" => Command::EvolveClass,
            "verify" => Command::Verify,
            other => return Err(Failure::config(format!("unknown command `{other}`"))),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum ModelKind {
    Ising1d,
    Ising2d,
    Potts,
    KitaevPotts,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Ising1d => "ising1d",
            ModelKind::Ising2d => "ising2d",
            ModelKind::Potts => "potts",
            ModelKind::KitaevPotts => "kitaev-potts",
        })
    }
}

impl FromStr for ModelKind {
    type Err = Failure;
    fn from_str(s: &str) -> Result<Self, Failure> {
        <ModelKind as clap::ValueEnum>::from_str(s, true).map_err(Failure::config)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum BoundaryKind {
    Ring,
    Open,
}

impl fmt::Display for BoundaryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundaryKind::Ring => "ring",
            BoundaryKind::Open => "open",
        })
    }
}

impl FromStr for BoundaryKind {
    type Err = Failure;
    fn from_str(s: &str) -> Result<Self, Failure> {
        <BoundaryKind as clap::ValueEnum>::from_str(s, true).map_err(Failure::config)
    }
}

/// `J` as given: a number or `auto`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Coupling {
    Auto,
    Value(f64),
}

impl fmt::Display for Coupling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coupling::Auto => f.write_str("auto"),
            Coupling::Value(x) => write!(f, "{x}"),
        }
    }
}

impl FromStr for Coupling {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        if s.eq_ignore_ascii_case("auto") {
            Ok(Coupling::Auto)
        } else {
            s.parse()
                .map(Coupling::Value)
                .map_err(|e| format!("bad coupling `{s}`: {e}"))
        }
    }
}

/// Lattice size: `inf`, `N` sites, or `LxW`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sites {
    Infinite,
    Chain(u16),
    Square(u16, u16),
}

impl fmt::Display for Sites {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sites::Infinite => f.write_str("inf"),
            Sites::Chain(n) => write!(f, "{n}"),
            Sites::Square(a, b) => write!(f, "{a}x{b}"),
        }
    }
}

impl FromStr for Sites {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let bad = |e: std::num::ParseIntError| format!("bad site count `{s}`: {e}");
        if s.eq_ignore_ascii_case("inf") {
            Ok(Sites::Infinite)
        } else if let Some((a, b)) = s.split_once('x') {
            Ok(Sites::Square(a.parse().map_err(bad)?, b.parse().map_err(bad)?))
        } else {
            s.parse().map(Sites::Chain).map_err(bad)
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelConfig {
    pub model: ModelKind,
    pub spin: SpinValue,
    pub j: Coupling,
    pub hx: f64,
    pub hz: f64,
    pub d: u8,
    pub h: f64,
    pub jx: Vec<f64>,
    pub jy: Vec<f64>,
    pub sites: Sites,
    pub boundary: BoundaryKind,
    pub hc: bool,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            model: ModelKind::Ising1d,
            spin: SpinValue::from_two_s(1).expect("spin 1/2"),
            j: Coupling::Value(1.0),
            hx: 1.0,
            hz: 1.0,
            d: 3,
            h: 1.0,
            jx: vec![1.0],
            jy: vec![1.0],
            sites: Sites::Infinite,
            boundary: BoundaryKind::Ring,
            hc: true,
        }
    }
}

impl ModelConfig {
    pub fn spec(&self) -> Result<ModelSpec, Failure> {
        let chain_extent = || match (self.sites, self.boundary) {
            (Sites::Infinite, _) => Ok(Extent::Thermodynamic),
            (Sites::Chain(n), BoundaryKind::Ring) => Ok(Extent::Ring(n)),
            (Sites::Chain(n), BoundaryKind::Open) => Ok(Extent::Open(n)),
            (Sites::Square(..), _) => Err(Failure::config(format!("{} is a chain model", self.model))),
        };
        let j = |spin: SpinValue| match self.j {
            Coupling::Auto => coupling_convention(spin),
            Coupling::Value(x) => x,
        };
        let fixed_j = || match self.j {
            Coupling::Auto => Err(Failure::config("J = auto applies to the Ising models only")),
            Coupling::Value(x) => Ok(x),
        };
        let spec = match self.model {
            ModelKind::Ising1d => ModelSpec::Ising {
                j: j(self.spin),
                hx: self.hx,
                hz: self.hz,
                spin: self.spin,
                lattice: LatticeSpec::chain(chain_extent()?),
            },
            ModelKind::Ising2d => {
                let extent = match (self.sites, self.boundary) {
                    (Sites::Infinite, _) => Extent::Thermodynamic,
                    (Sites::Square(a, b), BoundaryKind::Ring) => Extent::Torus(a, b),
                    _ => return Err(Failure::config("ising2d needs sites = inf or LxW with ring boundary")),
                };
                ModelSpec::Ising {
                    j: j(self.spin),
                    hx: self.hx,
                    hz: self.hz,
                    spin: self.spin,
                    lattice: LatticeSpec::square(extent),
                }
            }
            ModelKind::Potts => ModelSpec::Potts {
                d: self.d,
                j: fixed_j()?,
                h: self.h,
                lattice: LatticeSpec::chain(chain_extent()?),
            },
            ModelKind::KitaevPotts => ModelSpec::KitaevPotts {
                d: self.d,
                jx: self.jx.clone(),
                jy: self.jy.clone(),
                lattice: LatticeSpec::chain(chain_extent()?),
                hermitian_closure: self.hc,
            },
        };
        spec.validate().map_err(Failure::from)?;
        Ok(spec)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub model: ModelConfig,
    pub n_max: usize,
    pub budget: usize,
    pub checkpoint: Option<PathBuf>,
    pub resume: Option<PathBuf>,
    pub fit: FitForm,
    pub fit_n_min: usize,
    pub fit_n_max: Option<usize>,
    pub n_total: usize,
    pub extrapolate: bool,
    pub t_max: f64,
    pub steps: usize,
    pub seed: String,
    pub cap: usize,
    pub inventory: Option<PathBuf>,
    pub generator: Option<PathBuf>,
    pub input: PathBuf,
    pub out: PathBuf,
    pub threads: Option<usize>,
    /// Reserved for randomized procedures; every current command is
    /// deterministic.
    pub rng_seed: u64,
    pub suite: String,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        RunConfig {
            command,
            model: ModelConfig::default(),
            n_max: 12,
            budget: DEFAULT_BUDGET,
            checkpoint: None,
            resume: None,
            fit: FitForm::LinearLog,
            fit_n_min: DEFAULT_N_MIN,
            fit_n_max: None,
            n_total: DEFAULT_N_TOTAL,
            extrapolate: true,
            t_max: 5.0,
            steps: 200,
            seed: "Z@1".into(),
            cap: DEFAULT_CAP,
            inventory: None,
            generator: None,
            input: PathBuf::from("bn.json"),
            out: PathBuf::from("."),
            threads: None,
            rng_seed: 0,
            suite: "all".into(),
        }
    }

    pub fn to_ini(&self) -> Ini {
        fn opt<T: fmt::Display>(v: &Option<T>) -> String {
            v.as_ref().map(|x| x.to_string()).unwrap_or_default()
        }
        fn path(v: &Option<PathBuf>) -> String {
            v.as_ref().map(|p| p.display().to_string()).unwrap_or_default()
        }
        fn list(v: &[f64]) -> String {
            v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
        }
        let m = &self.model;
        let mut ini = Ini::new();
        ini.with_general_section().set("command", self.command.name());
        ini.with_section(Some("model"))
            .set("model", m.model.to_string())
            .set("spin", m.spin.to_string())
            .set("J", m.j.to_string())
            .set("hx", m.hx.to_string())
            .set("hz", m.hz.to_string())
            .set("d", m.d.to_string())
            .set("h", m.h.to_string())
            .set("jx", list(&m.jx))
            .set("jy", list(&m.jy))
            .set("sites", m.sites.to_string())
            .set("boundary", m.boundary.to_string())
            .set("hc", m.hc.to_string());
        ini.with_section(Some("lanczos"))
            .set("n", self.n_max.to_string())
            .set("budget", self.budget.to_string())
            .set("checkpoint", path(&self.checkpoint))
            .set("resume", path(&self.resume));
        ini.with_section(Some("fit"))
            .set("form", self.fit.to_string())
            .set("n_min", self.fit_n_min.to_string())
            .set("n_max", opt(&self.fit_n_max))
            .set("n_total", self.n_total.to_string())
            .set("extrapolate", self.extrapolate.to_string());
        ini.with_section(Some("time"))
            .set("tmax", self.t_max.to_string())
            .set("steps", self.steps.to_string());
        ini.with_section(Some("oed"))
            .set("seed", self.seed.clone())
            .set("cap", self.cap.to_string())
            .set("inventory", path(&self.inventory))
            .set("generator", path(&self.generator));
        ini.with_section(Some("io"))
            .set("input", self.input.display().to_string())
            .set("out", self.out.display().to_string());
        ini.with_section(Some("run"))
            .set("threads", opt(&self.threads))
            .set("rng_seed", self.rng_seed.to_string())
            .set("suite", self.suite.clone());
        ini
    }

    pub fn to_ini_string(&self) -> String {
        let mut buf = Vec::new();
        self.to_ini().write_to(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ini output is UTF-8")
    }

    /// Reads a config; keys that are absent keep their defaults.
    pub fn from_ini_str(text: &str) -> Result<Self, Failure> {
        let ini = Ini::load_from_str(text).map_err(|e| Failure::config(format!("config file: {e}")))?;
        let command = ini
            .general_section()
            .get("command")
            .ok_or_else(|| Failure::config("config file has no `command`"))?
            .parse()?;
        let mut cfg = RunConfig::new(command);
        let get = |section: &str, key: &str| ini.section(Some(section)).and_then(|s| s.get(key));
        let m = &mut cfg.model;
        set(&mut m.model, get("model", "model"))?;
        set(&mut m.spin, get("model", "spin"))?;
        set(&mut m.j, get("model", "J"))?;
        set(&mut m.hx, get("model", "hx"))?;
        set(&mut m.hz, get("model", "hz"))?;
        set(&mut m.d, get("model", "d"))?;
        set(&mut m.h, get("model", "h"))?;
        if let Some(v) = get("model", "jx") {
            m.jx = parse_list(v)?;
        }
        if let Some(v) = get("model", "jy") {
            m.jy = parse_list(v)?;
        }
        set(&mut m.sites, get("model", "sites"))?;
        set(&mut m.boundary, get("model", "boundary"))?;
        set(&mut m.hc, get("model", "hc"))?;
        set(&mut cfg.n_max, get("lanczos", "n"))?;
        set(&mut cfg.budget, get("lanczos", "budget"))?;
        set_opt(&mut cfg.checkpoint, get("lanczos", "checkpoint"))?;
        set_opt(&mut cfg.resume, get("lanczos", "resume"))?;
        set(&mut cfg.fit, get("fit", "form"))?;
        set(&mut cfg.fit_n_min, get("fit", "n_min"))?;
        set_opt(&mut cfg.fit_n_max, get("fit", "n_max"))?;
        set(&mut cfg.n_total, get("fit", "n_total"))?;
        set(&mut cfg.extrapolate, get("fit", "extrapolate"))?;
        set(&mut cfg.t_max, get("time", "tmax"))?;
        set(&mut cfg.steps, get("time", "steps"))?;
        if let Some(v) = get("oed", "seed") {
            cfg.seed = v.to_string();
        }
        set(&mut cfg.cap, get("oed", "cap"))?;
        set_opt(&mut cfg.inventory, get("oed", "inventory"))?;
        set_opt(&mut cfg.generator, get("oed", "generator"))?;
        set(&mut cfg.input, get("io", "input"))?;
        set(&mut cfg.out, get("io", "out"))?;
        set_opt(&mut cfg.threads, get("run", "threads"))?;
        set(&mut cfg.rng_seed, get("run", "rng_seed"))?;
        if let Some(v) = get("run", "suite") {
            cfg.suite = v.to_string();
        }
        Ok(cfg)
    }

    /// The INI sections as a JSON object, embedded in every output.
    pub fn to_json(&self) -> serde_json::Value {
        let mut out = serde_json::Map::new();
        for (section, props) in self.to_ini().iter() {
            let map: serde_json::Map<String, serde_json::Value> =
                props.iter().map(|(k, v)| (k.to_string(), v.into())).collect();
            match section {
                Some(name) => {
                    out.insert(name.to_string(), map.into());
                }
                None => out.extend(map),
            }
        }
        out.into()
    }

    /// Hash of the canonical INI text, stable across runs of one build.
    pub fn fingerprint(&self) -> String {
        let mut h = FxHasher::default();
        h.write(self.to_ini_string().as_bytes());
        format!("{:016x}", h.finish())
    }
}

fn set<T>(slot: &mut T, value: Option<&str>) -> Result<(), Failure>
where
    T: FromStr,
    T::Err: fmt::Display,
{
    if let Some(v) = value.filter(|v| !v.is_empty()) {
        *slot = v
            .parse()
            .map_err(|e: T::Err| Failure::config(format!("bad value `{v}`: {e}")))?;
    }
    Ok(())
}

fn set_opt<T>(slot: &mut Option<T>, value: Option<&str>) -> Result<(), Failure>
where
    T: FromStr,
    T::Err: fmt::Display,
{
    match value {
        Some("") => *slot = None,
        Some(v) => {
            *slot = Some(
                v.parse()
                    .map_err(|e: T::Err| Failure::config(format!("bad value `{v}`: {e}")))?,
            )
        }
        None => {}
    }
    Ok(())
}

pub fn parse_list(v: &str) -> Result<Vec<f64>, Failure> {
    v.split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .map_err(|e| Failure::config(format!("bad list entry `{x}`: {e}")))
        })
        .collect()
}
