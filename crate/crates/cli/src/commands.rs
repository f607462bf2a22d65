use std::fs::File;
use std::io::{BufReader, BufWriter};

use num_complex::Complex64;
use qudit_krylov::fragmentation::{
    class_autocorrelation, class_coefficients, equivalence_classes, evolve_in_class, oed_formula,
    restricted_liouvillian, EquivalenceReport,
};
use qudit_krylov::lanczos::{Lanczos, LanczosState, Step};
use qudit_krylov::recursion::{autocorrelation, autocorrelation_closed, extrapolate_bn, fit_bn, time_grid, FitParams};
use qudit_krylov::{
    build_hamiltonian, build_total_magnetization, Extent, Mode, ModelSpec, OperatorVector, Site, TermList, Termination,
    WeylString,
};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::RunConfig;
use crate::output::{num, path_in, write_json, write_table, Provenance};
use crate::Failure;

pub const BN_SCHEMA: &str = "qkrylov.bn/1";

/// The fields of `bn.json` read back by `autocorr` and `fit`.
#[derive(Deserialize)]
pub struct BnInput {
    pub schema: String,
    pub fingerprint: String,
    pub b: Vec<f64>,
    pub terminated: Termination,
}

#[derive(Serialize)]
struct BnOutput<'a> {
    #[serde(flatten)]
    provenance: Provenance<'a>,
    model: &'static str,
    params: &'a ModelSpec,
    d: u8,
    spin: String,
    lattice: &'static str,
    boundary: &'static str,
    extent: String,
    n_max: usize,
    b: &'a [f64],
    support_sizes: &'a [usize],
    terminated: Termination,
}

fn lattice_names(spec: &ModelSpec) -> (&'static str, &'static str) {
    let lattice = spec.lattice();
    let kind = if lattice.dimension == 2 { "square" } else { "chain" };
    let boundary = match lattice.extent {
        Extent::Thermodynamic => "infinite",
        Extent::Ring(_) => "ring",
        Extent::Open(_) => "open",
        Extent::Torus(..) => "torus",
    };
    (kind, boundary)
}

pub fn lanczos(cfg: &RunConfig) -> Result<(), Failure> {
    let spec = cfg.model.spec()?;
    let h = build_hamiltonian(&spec)?;
    let a = build_total_magnetization(spec.spin(), &spec.lattice())?;
    let mut run = match &cfg.resume {
        Some(path) => {
            let file = File::open(path).map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
            let state = LanczosState::read_snapshot(BufReader::new(file))?;
            if state.cur.d() != h.d() || state.cur.mode() != h.mode() {
                return Err(Failure::config(format!(
                    "snapshot {} belongs to a different model",
                    path.display()
                )));
            }
            Lanczos::resume(&h, state)?
        }
        None => Lanczos::new(&h, &a, false)?,
    };
    let terminated = loop {
        if run.state().b.len() >= cfg.n_max {
            break Termination::MaxIterations;
        }
        match run.step(cfg.budget)? {
            Step::Coefficient(b) => {
                let st = run.state();
                eprintln!(
                    "n = {:>3}  b = {b:.12}  strings = {}",
                    st.b.len(),
                    st.support_sizes.last().unwrap()
                );
            }
            Step::Done(t) => break t,
        }
    };
    if let Some(path) = &cfg.checkpoint {
        run.state().write_snapshot(BufWriter::new(File::create(path)?))?;
    }
    let res = run.finish(terminated);

    let (lattice, boundary) = lattice_names(&spec);
    let doc = BnOutput {
        provenance: Provenance::new(BN_SCHEMA, cfg),
        model: spec.name(),
        params: &spec,
        d: spec.d(),
        spin: spec.spin().to_string(),
        lattice,
        boundary,
        extent: spec.lattice().to_string(),
        n_max: cfg.n_max,
        b: &res.b,
        support_sizes: &res.support_sizes,
        terminated: res.terminated,
    };
    write_json(&path_in(cfg, "bn.json")?, &doc)?;
    let rows: Vec<Vec<String>> = res
        .b
        .iter()
        .enumerate()
        .map(|(i, &b)| vec![(i + 1).to_string(), num(b)])
        .collect();
    write_table(cfg, "bn", BN_SCHEMA, &["n", "b_n"], &rows)?;
    match res.terminated {
        Termination::BudgetExceeded { n } => Err(Failure::budget(format!(
            "string budget {} exceeded at n = {n}; {} coefficients written",
            cfg.budget,
            res.b.len()
        ))),
        _ => Ok(()),
    }
}

fn read_bn(cfg: &RunConfig) -> Result<BnInput, Failure> {
    let text =
        std::fs::read_to_string(&cfg.input).map_err(|e| Failure::config(format!("{}: {e}", cfg.input.display())))?;
    let input: BnInput =
        serde_json::from_str(&text).map_err(|e| Failure::config(format!("{}: {e}", cfg.input.display())))?;
    if input.schema != BN_SCHEMA {
        return Err(Failure::config(format!(
            "{}: schema `{}`, expected `{BN_SCHEMA}`",
            cfg.input.display(),
            input.schema
        )));
    }
    Ok(input)
}

#[derive(Serialize)]
struct FitOutput<'a> {
    #[serde(flatten)]
    provenance: Provenance<'a>,
    input: String,
    input_fingerprint: String,
    measured: usize,
    /// `measured`, `extrapolated`, or `closed` when the Krylov space ended.
    chain: &'static str,
    fit: Option<&'a FitParams>,
    chain_length: usize,
    norm_drift: Option<f64>,
}

pub fn autocorr(cfg: &RunConfig) -> Result<(), Failure> {
    let input = read_bn(cfg)?;
    let closed = matches!(input.terminated, Termination::SubspaceExhausted { .. });
    let fit = if closed || !cfg.extrapolate {
        None
    } else {
        Some(fit_bn(&input.b, cfg.fit, cfg.fit_n_min, cfg.fit_n_max)?)
    };
    let chain = match &fit {
        Some(f) => extrapolate_bn(&input.b, f, cfg.n_total)?,
        None => input.b.clone(),
    };
    let times = time_grid(cfg.t_max, cfg.steps);
    // measured-only mode is a deliberate truncation of the chain, so the
    // boundary check does not apply
    let series = if closed || fit.is_none() {
        autocorrelation_closed(&chain, &times)?
    } else {
        autocorrelation(&chain, &times)?
    };
    let rows: Vec<Vec<String>> = series
        .times
        .iter()
        .zip(&series.values)
        .map(|(&t, &c)| vec![num(t), num(c)])
        .collect();
    write_table(cfg, "ct", "qkrylov.ct/1", &["t", "C"], &rows)?;
    let doc = FitOutput {
        provenance: Provenance::new("qkrylov.fit/1", cfg),
        input: cfg.input.display().to_string(),
        input_fingerprint: input.fingerprint.clone(),
        measured: input.b.len(),
        chain: if closed {
            "closed"
        } else if fit.is_some() {
            "extrapolated"
        } else {
            "measured"
        },
        fit: fit.as_ref(),
        chain_length: chain.len(),
        norm_drift: Some(series.norm_drift),
    };
    write_json(&path_in(cfg, "fit.json")?, &doc)
}

pub fn fit(cfg: &RunConfig) -> Result<(), Failure> {
    let input = read_bn(cfg)?;
    let f = fit_bn(&input.b, cfg.fit, cfg.fit_n_min, cfg.fit_n_max)?;
    let doc = FitOutput {
        provenance: Provenance::new("qkrylov.fit/1", cfg),
        input: cfg.input.display().to_string(),
        input_fingerprint: input.fingerprint.clone(),
        measured: input.b.len(),
        chain: "measured",
        fit: Some(&f),
        chain_length: input.b.len(),
        norm_drift: None,
    };
    write_json(&path_in(cfg, "fit.json")?, &doc)?;
    let rows: Vec<Vec<String>> = input
        .b
        .iter()
        .enumerate()
        .map(|(i, &b)| vec![(i + 1).to_string(), num(b), num(f.eval(i + 1))])
        .collect();
    write_table(cfg, "fit", "qkrylov.fit/1", &["n", "b_n", "fit"], &rows)
}

/// `Z@3`, `X2Z1@1` (1-based chain site) or a full string.
pub fn parse_seed(text: &str, h: &TermList) -> Result<OperatorVector, Failure> {
    let d = h.d();
    let string = match text.split_once('@') {
        Some((ops, site)) => {
            let site: i16 = site
                .trim()
                .parse()
                .map_err(|e| Failure::config(format!("bad seed site `{site}`: {e}")))?;
            if site < 1 {
                return Err(Failure::config("seed sites are numbered from 1"));
            }
            let (v, w) = parse_local(ops.trim(), d)?;
            WeylString::single(d, Site::new(site - 1), v, w)
        }
        None => text.parse::<WeylString>()?,
    };
    if string.d() != d {
        return Err(Failure::config(format!(
            "seed has d = {}, model has d = {d}",
            string.d()
        )));
    }
    if let Mode::Finite(boundary) = h.mode() {
        if let Some(s) = string.support().find(|&s| !boundary.contains(s)) {
            return Err(Failure::config(format!("seed site {s} is outside the lattice")));
        }
    }
    Ok(OperatorVector::from_terms(
        d,
        h.mode(),
        [(string, Complex64::new(1.0, 0.0))],
    )?)
}

/// `X`, `Z`, `XZ`, `X2`, `X1Z2`, ...
fn parse_local(ops: &str, d: u8) -> Result<(u8, u8), Failure> {
    let bad = || Failure::config(format!("bad seed operator `{ops}`"));
    let (mut v, mut w) = (0u32, 0u32);
    let mut rest = ops;
    while let Some(c) = rest.chars().next() {
        let digits = rest[1..].chars().take_while(|c| c.is_ascii_digit()).count();
        let power: u32 = if digits == 0 {
            1
        } else {
            rest[1..1 + digits].parse().map_err(|_| bad())?
        };
        match c {
            'X' => v += power,
            'Z' => w += power,
            _ => return Err(bad()),
        }
        rest = &rest[1 + digits..];
    }
    if ops.is_empty() {
        return Err(bad());
    }
    Ok(((v % d as u32) as u8, (w % d as u32) as u8))
}

fn finite_sites(spec: &ModelSpec) -> Option<usize> {
    match spec.lattice().extent {
        Extent::Thermodynamic => None,
        Extent::Ring(n) | Extent::Open(n) => Some(n as usize),
        Extent::Torus(a, b) => Some(a as usize * b as usize),
    }
}

#[derive(Serialize)]
struct OedOutput<'a> {
    #[serde(flatten)]
    provenance: Provenance<'a>,
    model: String,
    #[serde(flatten)]
    report: &'a EquivalenceReport,
    /// `oed` is only a lower bound when the cap was hit.
    lower_bound: bool,
    diagnostics: serde_json::Value,
}

pub fn oed(cfg: &RunConfig) -> Result<(), Failure> {
    let spec = cfg.model.spec()?;
    let h = build_hamiltonian(&spec)?;
    let seed = parse_seed(&cfg.seed, &h)?;
    let report = equivalence_classes(&seed, &h, cfg.cap)?;
    // the chain length in the closed form can be read as sites or as
    // two-site cells; report both
    let diagnostics = match (finite_sites(&spec), &spec) {
        (Some(n), ModelSpec::KitaevPotts { .. }) => {
            let formula = |n: usize| (n >= 1).then(|| oed_formula(n));
            let cells = (n % 2 == 0).then_some(n / 2).filter(|&c| c >= 1);
            json!({
                "sites": n,
                "formula_sites": formula(n),
                "matches_sites": formula(n) == Some(report.oed as u64) && !report.cap_hit,
                "cells": cells,
                "formula_cells": cells.and_then(formula),
                "matches_cells": cells.and_then(formula) == Some(report.oed as u64) && !report.cap_hit,
            })
        }
        _ => serde_json::Value::Null,
    };
    if let Some(path) = &cfg.inventory {
        report.write_inventory(BufWriter::new(File::create(path)?))?;
    }
    let doc = OedOutput {
        provenance: Provenance::new("qkrylov.oed/1", cfg),
        model: spec.fingerprint(),
        report: &report,
        lower_bound: report.cap_hit,
        diagnostics,
    };
    write_json(&path_in(cfg, "oed.json")?, &doc)?;
    println!(
        "OED = {}{} in {} class(es)",
        report.oed,
        if report.cap_hit { " (lower bound, cap hit)" } else { "" },
        report.class_count
    );
    if report.cap_hit {
        return Err(Failure::budget(format!(
            "exploration stopped past {} strings; oed.json holds a lower bound",
            cfg.cap
        )));
    }
    Ok(())
}

pub fn evolve_class(cfg: &RunConfig) -> Result<(), Failure> {
    let spec = cfg.model.spec()?;
    let h = build_hamiltonian(&spec)?;
    let seed = parse_seed(&cfg.seed, &h)?;
    let report = equivalence_classes(&seed, &h, cfg.cap)?;
    let rl = restricted_liouvillian(&report, &h)?;
    if let Some(path) = &cfg.generator {
        rl.write_coordinate(BufWriter::new(File::create(path)?))?;
    }
    let f0 = class_coefficients(&rl, &seed)?;
    let times = time_grid(cfg.t_max, cfg.steps);
    let trajectory = evolve_in_class(&rl, &f0, &times)?;
    let c = class_autocorrelation(&f0, &trajectory);
    let rows: Vec<Vec<String>> = times.iter().zip(&c).map(|(&t, &c)| vec![num(t), num(c)]).collect();
    write_table(cfg, "class_ct", "qkrylov.class-ct/1", &["t", "C"], &rows)?;
    let doc = json!({
        "schema": "qkrylov.class/1",
        "version": crate::output::VERSION,
        "fingerprint": cfg.fingerprint(),
        "config": cfg.to_json(),
        "model": spec.fingerprint(),
        "seed": report.seed,
        "dim": rl.dim(),
        "nnz": rl.nnz(),
        "norm_bound": rl.norm_bound(),
        "class_count": report.class_count,
        "class_sizes": report.class_sizes,
    });
    write_json(&path_in(cfg, "class.json")?, &doc)
}
