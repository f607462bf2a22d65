//! Sparse linear combinations of clock/shift strings and the Liouvillian
//! `L = [H, ·]` acting on them.
//!
//! Two storage modes exist. In finite mode every string lives on an explicit
//! ring, torus or open chain. In translation-invariant mode a vector stores
//! one anchored representative per translation class and stands for the
//! implicit sum over all lattice translates; inner products are then per
//! unit cell.

use std::fmt;
use std::io::{BufRead, Write};

use num_complex::Complex64;
use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::weyl::{anchor_shift, commutator_factors, omega_pow, Factors, PhasedString, Site, WeylString};

/// Relative magnitude below which amplitudes are dropped after arithmetic.
pub const PRUNE_RELATIVE: f64 = 1e-14;

/// Input strings per parallel work unit in [`apply_liouvillian`]. Fixed so
/// the floating-point merge order never depends on the thread count.
const APPLY_CHUNK: usize = 2048;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Boundary {
    /// Periodic chain of `len` sites, `x ∈ [0, len)`.
    Ring { len: u16 },
    /// Periodic `lx × ly` square lattice.
    Torus { lx: u16, ly: u16 },
    /// Open chain of `len` sites.
    Open { len: u16 },
}

impl Boundary {
    pub fn wrap(&self, s: Site) -> Site {
        match *self {
            Boundary::Ring { len } => Site::new(s.x.rem_euclid(len as i16)),
            Boundary::Torus { lx, ly } => Site::new_2d(s.x.rem_euclid(lx as i16), s.y.rem_euclid(ly as i16)),
            Boundary::Open { .. } => s,
        }
    }

    pub fn sites(&self) -> Vec<Site> {
        match *self {
            Boundary::Ring { len } | Boundary::Open { len } => (0..len as i16).map(Site::new).collect(),
            Boundary::Torus { lx, ly } => (0..lx as i16)
                .flat_map(|x| (0..ly as i16).map(move |y| Site::new_2d(x, y)))
                .collect(),
        }
    }

    pub fn site_count(&self) -> usize {
        match *self {
            Boundary::Ring { len } | Boundary::Open { len } => len as usize,
            Boundary::Torus { lx, ly } => lx as usize * ly as usize,
        }
    }

    pub fn contains(&self, s: Site) -> bool {
        match *self {
            Boundary::Ring { len } | Boundary::Open { len } => s.y == 0 && s.x >= 0 && (s.x as u16) < len,
            Boundary::Torus { lx, ly } => s.x >= 0 && s.y >= 0 && (s.x as u16) < lx && (s.y as u16) < ly,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    Finite(Boundary),
    /// Infinite lattice of dimension `dim`, invariant under translations by
    /// multiples of `period` along each axis.
    TranslationInvariant {
        dim: u8,
        period: Site,
    },
}

impl Mode {
    pub fn thermodynamic(dim: u8) -> Self {
        Mode::TranslationInvariant {
            dim,
            period: if dim == 1 { Site::new(1) } else { Site::new_2d(1, 1) },
        }
    }

    pub fn is_translation_invariant(&self) -> bool {
        matches!(self, Mode::TranslationInvariant { .. })
    }

    /// Brings a string into the storage convention of this mode: wrapped
    /// onto the finite lattice, or translated to its canonical anchor.
    pub fn canonicalize(&self, s: &WeylString) -> Result<WeylString> {
        match self {
            Mode::Finite(b) => {
                for site in s.support() {
                    if matches!(b, Boundary::Open { .. }) && !b.contains(site) {
                        return Err(Error::InvalidString(format!("site {site} outside open chain")));
                    }
                }
                s.relabelled(|site| b.wrap(site))
            }
            Mode::TranslationInvariant { period, .. } => Ok(s.anchored(*period)?.0),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Finite(Boundary::Ring { len }) => write!(f, "finite ring {len}"),
            Mode::Finite(Boundary::Torus { lx, ly }) => write!(f, "finite torus {lx} {ly}"),
            Mode::Finite(Boundary::Open { len }) => write!(f, "finite open {len}"),
            Mode::TranslationInvariant { dim, period } => {
                write!(f, "translation_invariant {dim} {} {}", period.x, period.y)
            }
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split_whitespace().collect();
        let num = |i: usize| -> Result<u16> {
            parts
                .get(i)
                .and_then(|p| p.parse::<u16>().ok())
                .ok_or_else(|| Error::Parse(format!("bad mode `{text}`")))
        };
        match parts.as_slice() {
            ["finite", "ring", ..] => Ok(Mode::Finite(Boundary::Ring { len: num(2)? })),
            ["finite", "open", ..] => Ok(Mode::Finite(Boundary::Open { len: num(2)? })),
            ["finite", "torus", ..] => Ok(Mode::Finite(Boundary::Torus {
                lx: num(2)?,
                ly: num(3)?,
            })),
            ["translation_invariant", ..] => Ok(Mode::TranslationInvariant {
                dim: num(1)? as u8,
                period: Site::new_2d(num(2)? as i16, num(3)? as i16),
            }),
            _ => Err(Error::Parse(format!("bad mode `{text}`"))),
        }
    }
}

/// `canonical_anchor`: translate `p` so its lexicographically smallest
/// support site sits in the fundamental cell, returning the shift used.
pub fn canonical_anchor(p: &WeylString, period: Site) -> Result<(WeylString, Site)> {
    p.anchored(period)
}

/// Sparse operator `Σ_P a_P P`, sorted by string.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorVector {
    d: u8,
    mode: Mode,
    amps: Vec<(WeylString, Complex64)>,
}

fn check_compatible(d1: u8, m1: &Mode, d2: u8, m2: &Mode) -> Result<()> {
    if d1 != d2 {
        return Err(Error::DimensionMismatch { left: d1, right: d2 });
    }
    if m1 != m2 {
        return Err(Error::ModeMismatch {
            left: m1.to_string(),
            right: m2.to_string(),
        });
    }
    Ok(())
}

impl OperatorVector {
    pub fn zero(d: u8, mode: Mode) -> Self {
        OperatorVector {
            d,
            mode,
            amps: Vec::new(),
        }
    }

    /// Collects `(string, amplitude)` pairs, canonicalizing strings for the
    /// mode and summing repeats. The identity is rejected in
    /// translation-invariant mode.
    pub fn from_terms<I>(d: u8, mode: Mode, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (WeylString, Complex64)>,
    {
        let mut acc: FxHashMap<WeylString, Complex64> = FxHashMap::default();
        for (s, c) in terms {
            if s.d() != d {
                return Err(Error::DimensionMismatch { left: d, right: s.d() });
            }
            let key = mode.canonicalize(&s)?;
            *acc.entry(key).or_default() += c;
        }
        Ok(Self::from_map(d, mode, acc))
    }

    fn from_map(d: u8, mode: Mode, map: FxHashMap<WeylString, Complex64>) -> Self {
        let mut amps: Vec<_> = map.into_iter().collect();
        amps.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        let mut v = OperatorVector { d, mode, amps };
        v.prune();
        v
    }

    pub fn d(&self) -> u8 {
        self.d
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Number of stored strings.
    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&WeylString, Complex64)> + '_ {
        self.amps.iter().map(|(s, c)| (s, *c))
    }

    pub fn strings(&self) -> impl Iterator<Item = &WeylString> + '_ {
        self.amps.iter().map(|(s, _)| s)
    }

    pub fn get(&self, s: &WeylString) -> Complex64 {
        match self.amps.binary_search_by(|(k, _)| k.cmp(s)) {
            Ok(i) => self.amps[i].1,
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.amps.iter().map(|(_, c)| c.norm()).fold(0.0, f64::max)
    }

    pub fn scaled(mut self, alpha: Complex64) -> Self {
        if alpha == Complex64::new(0.0, 0.0) {
            self.amps.clear();
            return self;
        }
        for (_, c) in &mut self.amps {
            *c *= alpha;
        }
        self
    }

    fn prune(&mut self) {
        let cut = PRUNE_RELATIVE * self.max_abs();
        self.amps
            .retain(|(_, c)| c.norm() >= cut && *c != Complex64::new(0.0, 0.0));
    }

    /// `(A|B) = Σ_P conj(a_P) b_P`; per unit cell in translation-invariant
    /// mode.
    pub fn inner(&self, other: &OperatorVector) -> Result<Complex64> {
        check_compatible(self.d, &self.mode, other.d, &other.mode)?;
        let (a, b) = (&self.amps, &other.amps);
        let (mut i, mut j) = (0, 0);
        let mut acc = Complex64::new(0.0, 0.0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc += a[i].1.conj() * b[j].1;
                    i += 1;
                    j += 1;
                }
            }
        }
        Ok(acc)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|(_, c)| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Term-by-term adjoint `A† = Σ conj(a_P) P†`.
    pub fn adjoint(&self) -> OperatorVector {
        let mut map = FxHashMap::default();
        for (s, c) in &self.amps {
            let (phase, t) = s.adjoint_exact();
            *map.entry(t).or_default() += c.conj() * phase.to_complex();
        }
        Self::from_map(self.d, self.mode, map)
    }

    /// Writes the line-based text form:
    ///
    /// ```text
    /// # qudit-krylov operator v1
    /// d=3
    /// mode=translation_invariant 1 1 0
    /// <re> <im> (0):X1Z2 (1):X0Z1
    /// ```
    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# qudit-krylov operator v1")?;
        writeln!(out, "d={}", self.d)?;
        writeln!(out, "mode={}", self.mode)?;
        for (s, c) in &self.amps {
            let text = s.to_string();
            let factors = text.split_once(';').map(|x| x.1.trim()).unwrap_or("I");
            writeln!(out, "{:e} {:e} {}", c.re, c.im, factors)?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(input: R) -> Result<Self> {
        let mut d = None;
        let mut mode = None;
        let mut terms = Vec::new();
        for line in input.lines() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(v) = line.strip_prefix("d=") {
                d = Some(v.trim().parse::<u8>().map_err(|e| Error::Parse(format!("d: {e}")))?);
                continue;
            }
            if let Some(v) = line.strip_prefix("mode=") {
                mode = Some(v.parse::<Mode>()?);
                continue;
            }
            let d = d.ok_or_else(|| Error::Parse("amplitude before `d=` line".into()))?;
            let mut parts = line.splitn(3, ' ');
            let mut num = || -> Result<f64> {
                parts
                    .next()
                    .and_then(|p| p.parse::<f64>().ok())
                    .ok_or_else(|| Error::Parse(format!("bad amplitude line `{line}`")))
            };
            let (re, im) = (num()?, num()?);
            let body = parts.next().unwrap_or("I");
            let s: WeylString = format!("d={d}; {body}").parse()?;
            terms.push((s, Complex64::new(re, im)));
        }
        let d = d.ok_or_else(|| Error::Parse("missing `d=` line".into()))?;
        let mode = mode.ok_or_else(|| Error::Parse("missing `mode=` line".into()))?;
        OperatorVector::from_terms(d, mode, terms)
    }

    pub fn write_snapshot<W: Write>(&self, out: W) -> Result<()> {
        bincode::serialize_into(out, self)?;
        Ok(())
    }

    pub fn read_snapshot<R: std::io::Read>(input: R) -> Result<Self> {
        Ok(bincode::deserialize_from(input)?)
    }
}

/// `B + αA`, pruned.
pub fn axpy(alpha: Complex64, a: &OperatorVector, b: &OperatorVector) -> Result<OperatorVector> {
    check_compatible(a.d, &a.mode, b.d, &b.mode)?;
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (x, y) = (&a.amps, &b.amps);
    let (mut i, mut j) = (0, 0);
    while i < x.len() && j < y.len() {
        match x[i].0.cmp(&y[j].0) {
            std::cmp::Ordering::Less => {
                out.push((x[i].0.clone(), alpha * x[i].1));
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(y[j].clone());
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push((y[j].0.clone(), y[j].1 + alpha * x[i].1));
                i += 1;
                j += 1;
            }
        }
    }
    out.extend(x[i..].iter().map(|(s, c)| (s.clone(), alpha * c)));
    out.extend_from_slice(&y[j..]);
    let mut v = OperatorVector {
        d: a.d,
        mode: a.mode,
        amps: out,
    };
    v.prune();
    Ok(v)
}

/// A Hamiltonian as a list of phased strings. In translation-invariant mode
/// the list is one unit cell, implicitly summed over lattice translations.
#[derive(Clone, Debug)]
pub struct TermList {
    d: u8,
    mode: Mode,
    terms: Vec<PhasedString>,
    hermitian: bool,
    site_index: FxHashMap<Site, Vec<u32>>,
}

impl TermList {
    /// Canonicalizes, merges repeated strings and drops zero coefficients.
    /// Identity terms are dropped as well since they commute with everything.
    pub fn new(d: u8, mode: Mode, terms: Vec<PhasedString>) -> Result<Self> {
        let mut order: Vec<WeylString> = Vec::new();
        let mut acc: FxHashMap<WeylString, Complex64> = FxHashMap::default();
        for t in terms {
            if t.string.d() != d {
                return Err(Error::DimensionMismatch {
                    left: d,
                    right: t.string.d(),
                });
            }
            if t.string.is_identity() {
                continue;
            }
            let key = mode.canonicalize(&t.string)?;
            match acc.get_mut(&key) {
                Some(c) => *c += t.coeff,
                None => {
                    order.push(key.clone());
                    acc.insert(key, t.coeff);
                }
            }
        }
        let terms: Vec<PhasedString> = order
            .into_iter()
            .filter_map(|s| {
                let c = acc[&s];
                (c.norm() > 0.0).then(|| PhasedString::new(c, s))
            })
            .collect();
        let mut site_index: FxHashMap<Site, Vec<u32>> = FxHashMap::default();
        if let Mode::Finite(_) = mode {
            for (i, t) in terms.iter().enumerate() {
                for s in t.string.support() {
                    site_index.entry(s).or_default().push(i as u32);
                }
            }
        }
        let mut list = TermList {
            d,
            mode,
            terms,
            hermitian: false,
            site_index,
        };
        list.hermitian = list.hermiticity_defect().is_none();
        Ok(list)
    }

    pub fn d(&self) -> u8 {
        self.d
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn terms(&self) -> &[PhasedString] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn require_hermitian(&self) -> Result<()> {
        match self.hermiticity_defect() {
            None => Ok(()),
            Some(msg) => Err(Error::NotHermitian(msg)),
        }
    }

    /// The first term whose adjoint partner is missing or carries the wrong
    /// coefficient, if any.
    fn hermiticity_defect(&self) -> Option<String> {
        let lookup: FxHashMap<&WeylString, Complex64> = self.terms.iter().map(|t| (&t.string, t.coeff)).collect();
        for t in &self.terms {
            let (phase, adj) = t.string.adjoint_exact();
            let adj = self.mode.canonicalize(&adj).ok()?;
            let want = t.coeff.conj() * phase.to_complex();
            let have = lookup.get(&adj).copied().unwrap_or_default();
            let scale = t.coeff.norm().max(1.0);
            if (have - want).norm() > 1e-12 * scale {
                return Some(format!(
                    "term {} {} has adjoint {} with coefficient {} (expected {})",
                    t.coeff, t.string, adj, have, want
                ));
            }
        }
        None
    }

    /// Indices of the terms whose support meets that of `p` (finite mode).
    pub(crate) fn terms_touching(&self, p: &WeylString, out: &mut Vec<u32>) {
        out.clear();
        for s in p.support() {
            if let Some(ids) = self.site_index.get(&s) {
                out.extend_from_slice(ids);
            }
        }
        out.sort_unstable();
        out.dedup();
    }

    /// The same term list with every coupling multiplied by `alpha`.
    pub fn scaled(&self, alpha: f64) -> TermList {
        let mut out = self.clone();
        for t in &mut out.terms {
            t.coeff *= alpha;
        }
        out
    }
}

/// `[H, A]`.
///
/// Finite mode pairs each string with the terms touching its support. In
/// translation-invariant mode each anchored string is commuted with every
/// translate of every unit-cell term that overlaps it, and the results are
/// re-anchored; this is exact because `H` commutes with translations.
pub fn apply_liouvillian(h: &TermList, a: &OperatorVector) -> Result<OperatorVector> {
    check_compatible(h.d, &h.mode, a.d, &a.mode)?;
    let d = h.d;
    let omegas: Vec<Complex64> = (0..d as u32).map(|k| omega_pow(k, d)).collect();

    let partials: Vec<FxHashMap<WeylString, Complex64>> = a
        .amps
        .par_chunks(APPLY_CHUNK)
        .map(|chunk| {
            let mut acc: FxHashMap<WeylString, Complex64> = FxHashMap::default();
            acc.reserve(chunk.len() * 4);
            match h.mode {
                Mode::Finite(_) => apply_finite_chunk(h, chunk, &omegas, &mut acc),
                Mode::TranslationInvariant { period, .. } => {
                    apply_translated_chunk(h, chunk, period, &omegas, &mut acc)
                }
            }
            acc
        })
        .collect();

    let mut partials = partials.into_iter();
    let mut total = partials.next().unwrap_or_default();
    for part in partials {
        for (k, v) in part {
            *total.entry(k).or_default() += v;
        }
    }
    Ok(OperatorVector::from_map(d, a.mode, total))
}

fn apply_finite_chunk(
    h: &TermList,
    chunk: &[(WeylString, Complex64)],
    omegas: &[Complex64],
    acc: &mut FxHashMap<WeylString, Complex64>,
) {
    let d = h.d;
    let mut candidates: SmallVec<[u32; 64]> = SmallVec::new();
    for (p, amp) in chunk {
        candidates.clear();
        for s in p.support() {
            if let Some(ids) = h.site_index.get(&s) {
                candidates.extend_from_slice(ids);
            }
        }
        candidates.sort_unstable();
        candidates.dedup();
        for &ti in &candidates {
            let term = &h.terms[ti as usize];
            if let Some((plus, minus, f)) = commutator_factors(d, term.string.factors(), p.factors()) {
                let c = term.coeff * amp * (omegas[plus.exponent as usize] - omegas[minus.exponent as usize]);
                *acc.entry(WeylString::from_sorted_unchecked(d, f)).or_default() += c;
            }
        }
    }
}

fn apply_translated_chunk(
    h: &TermList,
    chunk: &[(WeylString, Complex64)],
    period: Site,
    omegas: &[Complex64],
    acc: &mut FxHashMap<WeylString, Complex64>,
) {
    let d = h.d;
    let mut shifts: SmallVec<[Site; 64]> = SmallVec::new();
    for (p, amp) in chunk {
        for term in &h.terms {
            shifts.clear();
            for ps in p.support() {
                for ts in term.string.support() {
                    let delta = Site::new_2d(ps.x - ts.x, ps.y - ts.y);
                    // only translations by whole periods are symmetries
                    if delta.x.rem_euclid(period.x.max(1)) == 0 && delta.y.rem_euclid(period.y.max(1)) == 0 {
                        shifts.push(delta);
                    }
                }
            }
            shifts.sort_unstable();
            shifts.dedup();
            for &shift in &shifts {
                let moved: Factors = term
                    .string
                    .factors()
                    .iter()
                    .map(|&(s, e)| (s.shifted(shift), e))
                    .collect();
                if let Some((plus, minus, f)) = commutator_factors(d, &moved, p.factors()) {
                    let Some(&(first, _)) = f.first() else {
                        continue;
                    };
                    let anchor = anchor_shift(first, period);
                    let f: Factors = f.into_iter().map(|(s, e)| (s.shifted(anchor), e)).collect();
                    let c = term.coeff * amp * (omegas[plus.exponent as usize] - omegas[minus.exponent as usize]);
                    *acc.entry(WeylString::from_sorted_unchecked(d, f)).or_default() += c;
                }
            }
        }
    }
}
