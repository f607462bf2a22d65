//! Oracle cross-checks runnable from the command line.

use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;
use qudit_krylov::fragmentation::{
    class_autocorrelation, class_coefficients, equivalence_classes, evolve_in_class, restricted_liouvillian, z_seed,
};
use qudit_krylov::oracle::{chain_cell, clock_matrix, dense_autocorr, dense_build, dense_lanczos, window_lanczos};
use qudit_krylov::recursion::{autocorrelation, autocorrelation_closed, time_grid};
use qudit_krylov::{
    build_hamiltonian, build_total_magnetization, coupling_convention, run_lanczos, spin_matrices, Extent,
    LanczosOptions, LatticeSpec, ModelSpec, Site, SpinValue, Termination, WeylString,
};

use crate::config::RunConfig;
use crate::Failure;

pub const SUITES: [&str; 4] = ["algebra", "lanczos-oracle", "recursion-oracle", "fragmentation-oracle"];

struct Check {
    name: String,
    residual: f64,
    tolerance: f64,
}

fn max_rel(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / y.abs())
        .fold(0.0, f64::max)
}

fn max_abs(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn mat_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn spin(two_s: u8) -> SpinValue {
    SpinValue::from_two_s(two_s).expect("positive spin")
}

fn ising(two_s: u8, j: f64, extent: Extent) -> ModelSpec {
    ModelSpec::Ising {
        j,
        hx: 1.0,
        hz: 1.0,
        spin: spin(two_s),
        lattice: LatticeSpec::chain(extent),
    }
}

fn potts(d: u8, extent: Extent) -> ModelSpec {
    ModelSpec::Potts {
        d,
        j: 1.0,
        h: 1.0,
        lattice: LatticeSpec::chain(extent),
    }
}

fn sparse_b(spec: &ModelSpec, n: usize) -> Result<(Vec<f64>, Termination), Failure> {
    let h = build_hamiltonian(spec)?;
    let a = build_total_magnetization(spec.spin(), &spec.lattice())?;
    let res = run_lanczos(&h, &a, &LanczosOptions::new(n))?;
    Ok((res.b, res.terminated))
}

/// Products and commutators of every two-site string pair against their
/// dense matrices.
fn algebra() -> Result<Vec<Check>, Failure> {
    let window = [Site::new(0), Site::new(1)];
    let mut out = Vec::new();
    for d in 2u8..=5 {
        let dd = d as u32;
        let strings: Vec<WeylString> = (0..dd.pow(4))
            .map(|k| {
                let e = |i: u32| ((k / dd.pow(i)) % dd) as u8;
                let a = WeylString::single(d, window[0], e(0), e(1));
                let b = WeylString::single(d, window[1], e(2), e(3));
                a.multiply(&b).map(|p| p.string)
            })
            .collect::<Result<_, _>>()?;
        let dense: Vec<DMatrix<Complex64>> = strings
            .iter()
            .map(|s| s.dense_matrix(&window))
            .collect::<Result<_, _>>()?;
        let (mut prod, mut comm) = (0.0f64, 0.0f64);
        for (p, dp) in strings.iter().zip(&dense) {
            for (q, dq) in strings.iter().zip(&dense) {
                let pq = p.multiply(q)?;
                let dpq = pq.string.dense_matrix(&window)? * pq.coeff;
                prod = prod.max(mat_diff(&dpq, &(dp * dq)));
                let c = match p.commutator(q)? {
                    Some(c) => c.string.dense_matrix(&window)? * c.coeff,
                    None => DMatrix::zeros(dp.nrows(), dp.ncols()),
                };
                comm = comm.max(mat_diff(&c, &(dp * dq - dq * dp)));
            }
        }
        out.push(Check {
            name: format!("d={d} products of all two-site strings"),
            residual: prod,
            tolerance: 1e-12,
        });
        out.push(Check {
            name: format!("d={d} commutators of all two-site strings"),
            residual: comm,
            tolerance: 1e-12,
        });
    }
    Ok(out)
}

fn lanczos_oracle(perturb: f64) -> Result<Vec<Check>, Failure> {
    let mut out = Vec::new();
    for (label, spec, n) in [
        ("ising S=1/2 ring 8", ising(1, 1.0, Extent::Ring(8)), 6),
        ("potts d=3 ring 6", potts(3, Extent::Ring(6)), 6),
    ] {
        let (mut b, _) = sparse_b(&spec, n)?;
        if out.is_empty() && b.len() > 1 {
            b[1] += perturb;
        }
        let dense = dense_lanczos(&dense_build(&spec)?, n)?;
        out.push(Check {
            name: format!("{label}: strings vs dense matrices, b_1..b_{n}"),
            residual: max_rel(&b, &dense),
            tolerance: 1e-10,
        });
    }
    let s1 = spin(2);
    let spec = ising(2, coupling_convention(s1), Extent::Thermodynamic);
    let (b, _) = sparse_b(&spec, 4)?;
    let (site, bond) = chain_cell(&spec)?;
    let window = window_lanczos(&site, &bond, &spin_matrices(s1).sz, 4)?;
    out.push(Check {
        name: "ising S=1 infinite chain: strings vs dense window, b_1..b_4".into(),
        residual: max_rel(&b, &window),
        tolerance: 1e-10,
    });
    Ok(out)
}

fn recursion_oracle(perturb: f64) -> Result<Vec<Check>, Failure> {
    let spec = potts(2, Extent::Ring(8));
    let (mut b, terminated) = sparse_b(&spec, 100)?;
    if b.len() > 1 {
        b[1] += perturb;
    }
    let times = time_grid(1.0, 40);
    let chain = match terminated {
        Termination::SubspaceExhausted { .. } => autocorrelation_closed(&b, &times)?,
        _ => autocorrelation(&b, &times)?,
    };
    let dense = dense_autocorr(&dense_build(&spec)?, &times)?;
    Ok(vec![Check {
        name: "potts d=2 ring 8: chain C(t) vs exact diagonalization, t <= 1".into(),
        residual: max_abs(&chain.values, &dense),
        tolerance: 1e-6,
    }])
}

fn fragmentation_oracle() -> Result<Vec<Check>, Failure> {
    let spec = ModelSpec::KitaevPotts {
        d: 3,
        jx: vec![1.0, 0.6],
        jy: vec![0.8, 1.3],
        lattice: LatticeSpec::chain(Extent::Ring(4)),
        hermitian_closure: true,
    };
    let h = build_hamiltonian(&spec)?;
    let seed = z_seed(&h, Site::new(0))?;
    let report = equivalence_classes(&seed, &h, 1 << 20)?;
    let rl = restricted_liouvillian(&report, &h)?;
    let f0 = class_coefficients(&rl, &seed)?;
    let times = time_grid(2.0, 40);
    let c = class_autocorrelation(&f0, &evolve_in_class(&rl, &f0, &times)?);
    let dense = dense_autocorr(&dense_build(&spec)?.with_site_observable(0, &clock_matrix(3))?, &times)?;
    Ok(vec![Check {
        name: "kitaev-potts d=3 ring 4: class evolution vs exact diagonalization, t <= 2".into(),
        residual: max_abs(&c, &dense),
        tolerance: 1e-8,
    }])
}

pub fn run(cfg: &RunConfig, perturb: f64) -> Result<(), Failure> {
    let suites: Vec<&str> = if cfg.suite == "all" {
        SUITES.to_vec()
    } else {
        cfg.suite.split(',').map(str::trim).collect()
    };
    if let Some(bad) = suites.iter().find(|s| !SUITES.contains(s)) {
        return Err(Failure::config(format!(
            "unknown suite `{bad}`; choose from all, {}",
            SUITES.join(", ")
        )));
    }
    let mut failed = 0;
    for suite in suites {
        let start = Instant::now();
        let checks = match suite {
            "algebra" => algebra()?,
            "lanczos-oracle" => lanczos_oracle(perturb)?,
            "recursion-oracle" => recursion_oracle(perturb)?,
            _ => fragmentation_oracle()?,
        };
        for c in &checks {
            let pass = c.residual <= c.tolerance;
            if !pass {
                failed += 1;
            }
            println!(
                "{} [{suite}] {}: residual {:.2e} (tolerance {:.0e})",
                if pass { "PASS" } else { "FAIL" },
                c.name,
                c.residual,
                c.tolerance
            );
        }
        println!("     [{suite}] {:.1} s", start.elapsed().as_secs_f64());
    }
    if failed > 0 {
        return Err(Failure {
            code: 1,
            message: format!("{failed} check(s) failed"),
        });
    }
    Ok(())
}
