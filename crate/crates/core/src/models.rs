//! Spin matrices, local clock/shift decomposition and the model
//! Hamiltonians: spin-S Ising on chains and square lattices, the d-state
//! Potts chain and the Kitaev–Potts chain.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{Boundary, Mode, OperatorVector, TermList};
use crate::weyl::{omega_pow, LocalExponents, PhasedString, Site, WeylString};

/// Spin magnitude stored as `2S`, so `d = 2S + 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpinValue {
    two_s: u8,
}

impl SpinValue {
    pub fn from_two_s(two_s: u8) -> Result<Self> {
        if two_s == 0 {
            return Err(Error::InvalidModel("spin must be positive".into()));
        }
        Ok(SpinValue { two_s })
    }

    pub fn from_dimension(d: u8) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidModel(format!("qudit dimension {d} < 2")));
        }
        SpinValue::from_two_s(d - 1)
    }

    pub fn two_s(self) -> u8 {
        self.two_s
    }

    pub fn spin(self) -> f64 {
        self.two_s as f64 / 2.0
    }

    pub fn d(self) -> u8 {
        self.two_s + 1
    }
}

impl fmt::Display for SpinValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.two_s.is_multiple_of(2) {
            write!(f, "{}", self.two_s / 2)
        } else {
            write!(f, "{}/2", self.two_s)
        }
    }
}

impl FromStr for SpinValue {
    type Err = Error;

    /// Accepts `1/2`, `3/2`, `1`, `2.5`, ...
    fn from_str(text: &str) -> Result<Self> {
        let text = text.trim();
        let bad = || Error::Parse(format!("bad spin `{text}`"));
        if let Some((num, den)) = text.split_once('/') {
            let num: u8 = num.trim().parse().map_err(|_| bad())?;
            return match den.trim() {
                "2" => SpinValue::from_two_s(num),
                "1" => SpinValue::from_two_s(num.checked_mul(2).ok_or_else(bad)?),
                _ => Err(bad()),
            };
        }
        let s: f64 = text.parse().map_err(|_| bad())?;
        let two_s = (2.0 * s).round();
        if (two_s - 2.0 * s).abs() > 1e-9 || !(1.0..=255.0).contains(&two_s) {
            return Err(bad());
        }
        SpinValue::from_two_s(two_s as u8)
    }
}

/// Dense `S^x, S^y, S^z` in the basis `|S>, |S−1>, …, |−S>`.
#[derive(Clone, Debug)]
pub struct SpinMatrices {
    pub sx: DMatrix<Complex64>,
    pub sy: DMatrix<Complex64>,
    pub sz: DMatrix<Complex64>,
}

pub fn spin_matrices(spin: SpinValue) -> SpinMatrices {
    let d = spin.d() as usize;
    let s = spin.spin();
    let m = |j: usize| s - j as f64;
    let mut sz = DMatrix::zeros(d, d);
    let mut sp = DMatrix::<Complex64>::zeros(d, d);
    for j in 0..d {
        sz[(j, j)] = Complex64::new(m(j), 0.0);
    }
    // <m+1| S+ |m>: row j-1 (m+1), column j (m)
    for j in 1..d {
        let mj = m(j);
        sp[(j - 1, j)] = Complex64::new((s * (s + 1.0) - mj * (mj + 1.0)).sqrt(), 0.0);
    }
    let sm = sp.adjoint();
    let sx = (&sp + &sm) * Complex64::new(0.5, 0.0);
    let sy = (&sp - &sm) * Complex64::new(0.0, -0.5);
    SpinMatrices { sx, sy, sz }
}

/// Clock/shift coefficients `c_{ab} = tr((X^a Z^b)† M)/d` of a `d × d`
/// matrix. Entries below `1e-12 · max|M_ij|` are dropped.
pub fn decompose_local(m: &DMatrix<Complex64>) -> BTreeMap<(u8, u8), Complex64> {
    assert!(m.is_square(), "local operator must be square");
    let d = m.nrows();
    let dd = d as u8;
    let scale = m.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut out = BTreeMap::new();
    for a in 0..d {
        for b in 0..d {
            let mut c = Complex64::new(0.0, 0.0);
            for j in 0..d {
                let phase = omega_pow(((d - b) * j % d) as u32, dd);
                c += phase * m[((j + a) % d, j)];
            }
            c /= d as f64;
            if c.norm() >= 1e-12 * scale && c.norm() > 0.0 {
                out.insert((a as u8, b as u8), c);
            }
        }
    }
    out
}

/// `J = 1/√(S(S+1))`, the coupling that keeps interaction and field on the
/// same scale across spins.
pub fn coupling_convention(spin: SpinValue) -> f64 {
    let s = spin.spin();
    1.0 / (s * (s + 1.0)).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Extent {
    Thermodynamic,
    Ring(u16),
    Torus(u16, u16),
    Open(u16),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub dimension: u8,
    pub extent: Extent,
}

impl LatticeSpec {
    pub fn chain(extent: Extent) -> Self {
        LatticeSpec { dimension: 1, extent }
    }

    pub fn square(extent: Extent) -> Self {
        LatticeSpec { dimension: 2, extent }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidModel(m));
        match (self.dimension, self.extent) {
            (1 | 2, Extent::Thermodynamic) => Ok(()),
            (1, Extent::Ring(n) | Extent::Open(n)) if n >= 2 => Ok(()),
            (2, Extent::Torus(a, b)) if a >= 2 && b >= 2 => Ok(()),
            (1 | 2, e) => bad(format!("extent {e:?} invalid for dimension {}", self.dimension)),
            (dim, _) => bad(format!("lattice dimension {dim} not supported")),
        }
    }

    pub fn mode(&self) -> Mode {
        match self.extent {
            Extent::Thermodynamic => Mode::thermodynamic(self.dimension),
            Extent::Ring(len) => Mode::Finite(Boundary::Ring { len }),
            Extent::Open(len) => Mode::Finite(Boundary::Open { len }),
            Extent::Torus(lx, ly) => Mode::Finite(Boundary::Torus { lx, ly }),
        }
    }

    /// Sites carrying on-site terms: one site in the thermodynamic limit,
    /// every site otherwise.
    fn cell_sites(&self) -> Vec<Site> {
        match self.mode() {
            Mode::Finite(b) => b.sites(),
            Mode::TranslationInvariant { .. } => vec![Site::ORIGIN],
        }
    }

    /// Nearest-neighbour bonds `(i, j)` with `j = i + e` for `e ∈ {x̂, ŷ}`,
    /// wrapped and deduplicated as unordered pairs.
    fn bonds(&self) -> Vec<(Site, Site)> {
        let dirs: &[Site] = if self.dimension == 1 {
            &[Site::new(1)]
        } else {
            &[Site::new_2d(1, 0), Site::new_2d(0, 1)]
        };
        let mode = self.mode();
        let mut out: Vec<(Site, Site)> = Vec::new();
        for s in self.cell_sites() {
            for &e in dirs {
                let t = s.shifted(e);
                let (a, b) = match mode {
                    Mode::Finite(Boundary::Open { len }) => {
                        if t.x >= len as i16 {
                            continue;
                        }
                        (s, t)
                    }
                    Mode::Finite(bd) => (bd.wrap(s), bd.wrap(t)),
                    Mode::TranslationInvariant { .. } => (s, t),
                };
                if a == b {
                    continue;
                }
                let key = if a < b { (a, b) } else { (b, a) };
                if !out.iter().any(|&(p, q)| (p.min(q), p.max(q)) == key) {
                    out.push((a, b));
                }
            }
        }
        out
    }
}

impl fmt::Display for LatticeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.extent {
            Extent::Thermodynamic => write!(f, "{}d-thermodynamic", self.dimension),
            Extent::Ring(n) => write!(f, "ring-{n}"),
            Extent::Open(n) => write!(f, "open-{n}"),
            Extent::Torus(a, b) => write!(f, "torus-{a}x{b}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ModelSpec {
    /// `J Σ S^x_i S^x_j + h_x Σ S^x_i + h_z Σ S^z_i`.
    Ising {
        j: f64,
        hx: f64,
        hz: f64,
        spin: SpinValue,
        lattice: LatticeSpec,
    },
    /// `J Σ_i Σ_{k=1}^{d-1} (Z_i Z†_{i+1})^k + h Σ_i (X_i + X†_i)`.
    Potts {
        d: u8,
        j: f64,
        h: f64,
        lattice: LatticeSpec,
    },
    /// Alternating `J^x X†_i X_{i+1}` (bonds starting at even sites) and
    /// `J^y Z†_i Z_{i+1}` (bonds starting at odd sites). Couplings cycle if
    /// the lists are shorter than the number of bonds of each kind.
    KitaevPotts {
        d: u8,
        jx: Vec<f64>,
        jy: Vec<f64>,
        lattice: LatticeSpec,
        hermitian_closure: bool,
    },
}

impl ModelSpec {
    pub fn d(&self) -> u8 {
        match self {
            ModelSpec::Ising { spin, .. } => spin.d(),
            ModelSpec::Potts { d, .. } | ModelSpec::KitaevPotts { d, .. } => *d,
        }
    }

    pub fn lattice(&self) -> LatticeSpec {
        match self {
            ModelSpec::Ising { lattice, .. }
            | ModelSpec::Potts { lattice, .. }
            | ModelSpec::KitaevPotts { lattice, .. } => *lattice,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::Ising { lattice, .. } if lattice.dimension == 2 => "ising2d",
            ModelSpec::Ising { .. } => "ising1d",
            ModelSpec::Potts { .. } => "potts",
            ModelSpec::KitaevPotts { .. } => "kitaev-potts",
        }
    }

    /// Spin whose `S^z` is the default observable (`d = 2S + 1`).
    pub fn spin(&self) -> SpinValue {
        SpinValue::from_two_s(self.d() - 1).expect("d >= 2 is validated")
    }

    /// Same model on another lattice extent.
    pub fn with_extent(&self, extent: Extent) -> ModelSpec {
        let mut out = self.clone();
        match &mut out {
            ModelSpec::Ising { lattice, .. }
            | ModelSpec::Potts { lattice, .. }
            | ModelSpec::KitaevPotts { lattice, .. } => lattice.extent = extent,
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let lattice = self.lattice();
        lattice.validate()?;
        let finite = |x: f64, name: &str| {
            if x.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidModel(format!("{name} = {x} is not finite")))
            }
        };
        match self {
            ModelSpec::Ising { j, hx, hz, .. } => {
                finite(*j, "J")?;
                finite(*hx, "hx")?;
                finite(*hz, "hz")
            }
            ModelSpec::Potts { d, j, h, .. } => {
                if *d < 2 {
                    return Err(Error::InvalidModel(format!("Potts d = {d} < 2")));
                }
                if lattice.dimension != 1 {
                    return Err(Error::InvalidModel("Potts model is one-dimensional".into()));
                }
                finite(*j, "J")?;
                finite(*h, "h")
            }
            ModelSpec::KitaevPotts { d, jx, jy, .. } => {
                if *d < 2 {
                    return Err(Error::InvalidModel(format!("Kitaev-Potts d = {d} < 2")));
                }
                if lattice.dimension != 1 {
                    return Err(Error::InvalidModel("Kitaev-Potts chain is one-dimensional".into()));
                }
                if jx.is_empty() || jy.is_empty() {
                    return Err(Error::InvalidModel("Kitaev-Potts needs Jx and Jy".into()));
                }
                for &c in jx.iter().chain(jy) {
                    finite(c, "coupling")?;
                }
                match lattice.extent {
                    Extent::Ring(n) if n % 2 == 1 => Err(Error::InvalidModel(format!(
                        "Kitaev-Potts ring needs an even site count, got {n}"
                    ))),
                    Extent::Thermodynamic if jx.len() > 1 || jy.len() > 1 => Err(Error::InvalidModel(
                        "Kitaev-Potts in the thermodynamic limit needs uniform couplings".into(),
                    )),
                    _ => Ok(()),
                }
            }
        }
    }

    /// Compact human-readable description embedded in outputs.
    pub fn fingerprint(&self) -> String {
        match self {
            ModelSpec::Ising {
                j,
                hx,
                hz,
                spin,
                lattice,
            } => format!("{} S={spin} J={j} hx={hx} hz={hz} {lattice}", self.name()),
            ModelSpec::Potts { d, j, h, lattice } => format!("potts d={d} J={j} h={h} {lattice}"),
            ModelSpec::KitaevPotts {
                d,
                jx,
                jy,
                lattice,
                hermitian_closure,
            } => format!(
                "kitaev-potts d={d} Jx={jx:?} Jy={jy:?} {lattice}{}",
                if *hermitian_closure { "" } else { " no-hc" }
            ),
        }
    }
}

fn local_terms(
    d: u8,
    at: &[Site],
    parts: &[&BTreeMap<(u8, u8), Complex64>],
    scale: f64,
    out: &mut Vec<PhasedString>,
) -> Result<()> {
    // tensor product of the local decompositions placed at `at`
    let mut acc: Vec<(Vec<(Site, LocalExponents)>, Complex64)> = vec![(Vec::new(), Complex64::new(scale, 0.0))];
    for (site, part) in at.iter().zip(parts) {
        let mut next = Vec::with_capacity(acc.len() * part.len());
        for (fs, c) in &acc {
            for (&(a, b), &k) in part.iter() {
                let mut f = fs.clone();
                f.push((*site, LocalExponents::new(a, b)));
                next.push((f, c * k));
            }
        }
        acc = next;
    }
    for (fs, c) in acc {
        out.push(PhasedString::new(c, WeylString::from_factors(d, fs)?));
    }
    Ok(())
}

/// Clock/shift term list of a model. In the thermodynamic limit this is one
/// unit cell: a site with its `+x` (and `+y`) bonds, or for the
/// Kitaev–Potts chain a two-site cell.
pub fn build_hamiltonian(spec: &ModelSpec) -> Result<TermList> {
    spec.validate()?;
    let lattice = spec.lattice();
    let d = spec.d();
    let mut terms = Vec::new();
    let mode = match spec {
        ModelSpec::Ising { j, hx, hz, spin, .. } => {
            let m = spin_matrices(*spin);
            let sx = decompose_local(&m.sx);
            let sz = decompose_local(&m.sz);
            for (a, b) in lattice.bonds() {
                if *j != 0.0 {
                    local_terms(d, &[a, b], &[&sx, &sx], *j, &mut terms)?;
                }
            }
            for s in lattice.cell_sites() {
                if *hx != 0.0 {
                    local_terms(d, &[s], &[&sx], *hx, &mut terms)?;
                }
                if *hz != 0.0 {
                    local_terms(d, &[s], &[&sz], *hz, &mut terms)?;
                }
            }
            lattice.mode()
        }
        ModelSpec::Potts { j, h, .. } => {
            let c = |x: f64| Complex64::new(x, 0.0);
            for (a, b) in lattice.bonds() {
                for k in 1..d {
                    let s = WeylString::from_factors(
                        d,
                        [(a, LocalExponents::new(0, k)), (b, LocalExponents::new(0, d - k))],
                    )?;
                    terms.push(PhasedString::new(c(*j), s));
                }
            }
            for s in lattice.cell_sites() {
                terms.push(PhasedString::new(c(*h), WeylString::single(d, s, 1, 0)));
                terms.push(PhasedString::new(c(*h), WeylString::single(d, s, d - 1, 0)));
            }
            lattice.mode()
        }
        ModelSpec::KitaevPotts {
            jx,
            jy,
            hermitian_closure,
            ..
        } => {
            let (bonds, mode) = match lattice.extent {
                Extent::Thermodynamic => (
                    vec![(Site::new(0), Site::new(1)), (Site::new(1), Site::new(2))],
                    Mode::TranslationInvariant {
                        dim: 1,
                        period: Site::new(2),
                    },
                ),
                Extent::Ring(n) => (
                    (0..n as i16)
                        .map(|i| (Site::new(i), Site::new((i + 1) % n as i16)))
                        .collect(),
                    lattice.mode(),
                ),
                Extent::Open(n) => (
                    (0..n as i16 - 1).map(|i| (Site::new(i), Site::new(i + 1))).collect(),
                    lattice.mode(),
                ),
                Extent::Torus(..) => unreachable!("validated as one-dimensional"),
            };
            for (b, (s, t)) in bonds.into_iter().enumerate() {
                let (exps, coupling) = if b % 2 == 0 {
                    (
                        (LocalExponents::new(d - 1, 0), LocalExponents::new(1, 0)),
                        jx[(b / 2) % jx.len()],
                    )
                } else {
                    (
                        (LocalExponents::new(0, d - 1), LocalExponents::new(0, 1)),
                        jy[(b / 2) % jy.len()],
                    )
                };
                if coupling == 0.0 {
                    continue;
                }
                let string = WeylString::from_factors(d, [(s, exps.0), (t, exps.1)])?;
                let term = PhasedString::new(Complex64::new(coupling, 0.0), string);
                if *hermitian_closure {
                    let adj = term.string.adjoint();
                    terms.push(PhasedString::new(term.coeff.conj() * adj.coeff, adj.string));
                }
                terms.push(term);
            }
            mode
        }
    };
    let list = TermList::new(d, mode, terms)?;
    let literal_kp = matches!(
        spec,
        ModelSpec::KitaevPotts {
            hermitian_closure: false,
            ..
        }
    );
    if !literal_kp {
        list.require_hermitian()?;
    }
    Ok(list)
}

/// `Σ_i S^z_i`, unnormalized. In the thermodynamic limit the stored
/// representative is the decomposition of `S^z` at the origin.
pub fn build_total_magnetization(spin: SpinValue, lattice: &LatticeSpec) -> Result<OperatorVector> {
    lattice.validate()?;
    let sz = decompose_local(&spin_matrices(spin).sz);
    let d = spin.d();
    let sites = match lattice.mode() {
        Mode::Finite(b) => b.sites(),
        Mode::TranslationInvariant { .. } => vec![Site::ORIGIN],
    };
    let terms = sites
        .into_iter()
        .flat_map(|s| sz.iter().map(move |(&(a, b), &c)| (WeylString::single(d, s, a, b), c)));
    OperatorVector::from_terms(d, lattice.mode(), terms)
}
