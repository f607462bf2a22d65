#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64 as C;
use qudit_krylov::oracle::{clock_matrix, shift_matrix};
use qudit_krylov::{
    apply_liouvillian, Boundary, LocalExponents, Mode, OperatorVector, PhasedString, Site, TermList, WeylString,
};
use rand::Rng;

pub fn chain_window(n: usize) -> Vec<Site> {
    (0..n).map(|i| Site::new(i as i16)).collect()
}

/// Matrix of a string from explicit clock/shift powers, site order as in `window`.
pub fn dense_of(s: &WeylString, window: &[Site]) -> DMatrix<C> {
    let d = s.d() as usize;
    let x = shift_matrix(d);
    let z = clock_matrix(d);
    let mut out = DMatrix::from_element(1, 1, C::new(1.0, 0.0));
    for &site in window {
        let e = s.exponents_at(site);
        let mut local = DMatrix::identity(d, d);
        for _ in 0..e.v {
            local = &local * &x;
        }
        for _ in 0..e.w {
            local = &local * &z;
        }
        out = out.kronecker(&local);
    }
    out
}

pub fn dense_terms(h: &TermList, window: &[Site]) -> DMatrix<C> {
    let dim = (h.d() as usize).pow(window.len() as u32);
    let mut m = DMatrix::zeros(dim, dim);
    for t in h.terms() {
        m += dense_of(&t.string, window) * t.coeff;
    }
    m
}

pub fn dense_vector(a: &OperatorVector, window: &[Site]) -> DMatrix<C> {
    let dim = (a.d() as usize).pow(window.len() as u32);
    let mut m = DMatrix::zeros(dim, dim);
    for (s, c) in a.iter() {
        m += dense_of(s, window) * c;
    }
    m
}

/// `tr(A†B)/D`
pub fn hs_inner(a: &DMatrix<C>, b: &DMatrix<C>) -> C {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum::<C>() / a.nrows() as f64
}

pub fn max_diff(a: &DMatrix<C>, b: &DMatrix<C>) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn random_string<R: Rng>(rng: &mut R, d: u8, sites: usize) -> WeylString {
    let factors = (0..sites).map(|i| {
        (
            Site::new(i as i16),
            LocalExponents::new(rng.gen_range(0..d), rng.gen_range(0..d)),
        )
    });
    WeylString::from_factors(d, factors).unwrap()
}

fn random_coeff<R: Rng>(rng: &mut R) -> C {
    C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

pub fn random_vector<R: Rng>(rng: &mut R, d: u8, sites: usize, mode: Mode, terms: usize) -> OperatorVector {
    let t: Vec<_> = (0..terms)
        .map(|_| (random_string(rng, d, sites), random_coeff(rng)))
        .filter(|(s, _)| !(s.is_identity() && mode.is_translation_invariant()))
        .collect();
    OperatorVector::from_terms(d, mode, t).unwrap()
}

/// Random Hermitian term list: each drawn string is paired with its adjoint.
pub fn random_hermitian<R: Rng>(rng: &mut R, d: u8, sites: usize, mode: Mode, terms: usize) -> TermList {
    let mut list = Vec::new();
    for _ in 0..terms {
        let s = random_string(rng, d, sites);
        if s.is_identity() {
            continue;
        }
        let c = random_coeff(rng);
        let adj = s.adjoint();
        list.push(PhasedString::new(c, s));
        list.push(PhasedString::new(c.conj() * adj.coeff, adj.string));
    }
    TermList::new(d, mode, list).unwrap()
}

/// Largest dense window used for randomized checks.
pub fn sites_for(d: u8) -> usize {
    match d {
        2 => 4,
        3 | 4 => 3,
        _ => 2,
    }
}

/// One randomized instance of the algebra invariants: dense homomorphism,
/// associativity with phases, unitarity, adjoint, commutator, trace
/// orthonormality, self-adjointness of `L`, anchoring idempotence.
pub fn check_algebra_instance<R: Rng>(rng: &mut R, d: u8) -> Result<(), String> {
    let n = rng.gen_range(1..=sites_for(d));
    let w = chain_window(n);
    let p = random_string(rng, d, n);
    let q = random_string(rng, d, n);
    let r = random_string(rng, d, n);
    let (dp, dq) = (dense_of(&p, &w), dense_of(&q, &w));
    let tol = 1e-10;

    let pq = p.multiply(&q).map_err(|e| e.to_string())?;
    if max_diff(&(dense_of(&pq.string, &w) * pq.coeff), &(&dp * &dq)) > tol {
        return Err(format!("homomorphism fails for {p} · {q}"));
    }

    let (ph1, s1) = p.multiply_exact(&q).unwrap();
    let (ph2, left) = s1.multiply_exact(&r).unwrap();
    let (ph3, s2) = q.multiply_exact(&r).unwrap();
    let (ph4, right) = p.multiply_exact(&s2).unwrap();
    if left != right || ph1.times(ph2) != ph3.times(ph4) {
        return Err(format!("associativity fails for {p}, {q}, {r}"));
    }

    let dim = dp.nrows();
    if max_diff(&(&dp * dp.adjoint()), &DMatrix::identity(dim, dim)) > tol {
        return Err(format!("{p} is not unitary"));
    }
    let adj = p.adjoint();
    if max_diff(&(dense_of(&adj.string, &w) * adj.coeff), &dp.adjoint()) > tol {
        return Err(format!("adjoint of {p} is wrong"));
    }

    let dense_comm = &dp * &dq - &dq * &dp;
    match p.commutator(&q).unwrap() {
        Some(c) => {
            if max_diff(&(dense_of(&c.string, &w) * c.coeff), &dense_comm) > tol {
                return Err(format!("commutator of {p}, {q} is wrong"));
            }
        }
        None => {
            if dense_comm.iter().any(|z| z.norm() > tol) {
                return Err(format!("{p} and {q} reported commuting"));
            }
        }
    }

    let ip = hs_inner(&dp, &dq);
    let want = if p == q { 1.0 } else { 0.0 };
    if (ip - C::new(want, 0.0)).norm() > tol {
        return Err(format!("trace inner product of {p}, {q} is {ip}"));
    }

    let mode = Mode::Finite(Boundary::Ring { len: n as u16 });
    let h = random_hermitian(rng, d, n, mode, 3);
    let a = random_vector(rng, d, n, mode, 3);
    let b = random_vector(rng, d, n, mode, 3);
    let la = apply_liouvillian(&h, &a).unwrap();
    let lb = apply_liouvillian(&h, &b).unwrap();
    let lhs = a.inner(&lb).unwrap();
    let rhs = la.inner(&b).unwrap();
    if (lhs - rhs).norm() > 1e-10 * (1.0 + lhs.norm()) {
        return Err(format!("L is not self-adjoint: {lhs} vs {rhs}"));
    }
    let dh = dense_terms(&h, &w);
    let da = dense_vector(&a, &w);
    if max_diff(&dense_vector(&la, &w), &(&dh * &da - &da * &dh)) > 1e-9 {
        return Err("Liouvillian differs from the dense commutator".into());
    }

    if p.is_identity() {
        return Ok(());
    }
    let period = Site::new(1);
    let (anchored, _) = p.anchored(period).unwrap();
    let shift = Site::new(rng.gen_range(-20..20));
    let (again, _) = anchored.anchored(period).unwrap();
    let (moved, _) = p.translated(shift).anchored(period).unwrap();
    if again != anchored || moved != anchored {
        return Err(format!(
            "anchoring of {p} is not idempotent or not translation-invariant"
        ));
    }
    Ok(())
}
