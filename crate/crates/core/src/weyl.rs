//! Generalized Pauli (clock/shift) strings.
//!
//! A string is a tensor product of local factors `X^v Z^w` over lattice
//! sites, where `X|j> = |j+1 mod d>` and `Z|j> = ω^j |j>` with
//! `ω = exp(2πi/d)`. Products of strings are strings up to a power of `ω`,
//! and all phases are kept as integer exponents so that commutator zero
//! tests are exact.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};

/// Lattice coordinate. One-dimensional lattices use `y = 0`.
///
/// Ordering is lexicographic on `(x, y)`, which is the order factors are
/// stored in and the order used to pick canonical anchors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Site {
    pub x: i16,
    pub y: i16,
}

impl Site {
    pub const ORIGIN: Site = Site { x: 0, y: 0 };

    pub const fn new(x: i16) -> Self {
        Site { x, y: 0 }
    }

    pub const fn new_2d(x: i16, y: i16) -> Self {
        Site { x, y }
    }

    pub fn shifted(self, by: Site) -> Site {
        Site {
            x: self.x + by.x,
            y: self.y + by.y,
        }
    }

    pub fn negated(self) -> Site {
        Site { x: -self.x, y: -self.y }
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.y == 0 {
            write!(f, "({})", self.x)
        } else {
            write!(f, "({},{})", self.x, self.y)
        }
    }
}

/// Exponents of one local factor `X^v Z^w`, both in `[0, d)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LocalExponents {
    pub v: u8,
    pub w: u8,
}

impl LocalExponents {
    pub const fn new(v: u8, w: u8) -> Self {
        LocalExponents { v, w }
    }

    pub fn is_identity(self) -> bool {
        self.v == 0 && self.w == 0
    }
}

pub type Factor = (Site, LocalExponents);
pub(crate) type Factors = SmallVec<[Factor; 10]>;

/// `ω^k` for `ω = exp(2πi/d)`. Quarter turns are returned exactly.
pub fn omega_pow(k: u32, d: u8) -> Complex64 {
    let d = d as u32;
    let k = k % d;
    if k == 0 {
        return Complex64::new(1.0, 0.0);
    }
    if 2 * k == d {
        return Complex64::new(-1.0, 0.0);
    }
    if 4 * k == d {
        return Complex64::new(0.0, 1.0);
    }
    if 4 * k == 3 * d {
        return Complex64::new(0.0, -1.0);
    }
    let angle = 2.0 * std::f64::consts::PI * k as f64 / d as f64;
    Complex64::new(angle.cos(), angle.sin())
}

/// A power of `ω`, stored as its exponent modulo `d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Phase {
    pub exponent: u8,
    pub d: u8,
}

impl Phase {
    pub fn one(d: u8) -> Self {
        Phase { exponent: 0, d }
    }

    pub fn to_complex(self) -> Complex64 {
        omega_pow(self.exponent as u32, self.d)
    }

    pub fn times(self, other: Phase) -> Phase {
        debug_assert_eq!(self.d, other.d);
        Phase {
            exponent: ((self.exponent as u32 + other.exponent as u32) % self.d as u32) as u8,
            d: self.d,
        }
    }
}

/// Product of local clock/shift factors; the identity is the empty string.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WeylString {
    d: u8,
    factors: Factors,
}

/// A string with a nonzero complex prefactor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhasedString {
    pub coeff: Complex64,
    pub string: WeylString,
}

impl PhasedString {
    pub fn new(coeff: Complex64, string: WeylString) -> Self {
        PhasedString { coeff, string }
    }
}

fn check_dims(a: u8, b: u8) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch { left: a, right: b });
    }
    Ok(())
}

impl WeylString {
    pub fn identity(d: u8) -> Self {
        assert!(d >= 2, "qudit dimension must be at least 2");
        WeylString {
            d,
            factors: Factors::new(),
        }
    }

    /// Single-site factor `X^v Z^w`; exponents are reduced modulo `d`.
    pub fn single(d: u8, site: Site, v: u8, w: u8) -> Self {
        let mut s = WeylString::identity(d);
        let e = LocalExponents::new(v % d, w % d);
        if !e.is_identity() {
            s.factors.push((site, e));
        }
        s
    }

    /// Builds a string from factors in any order. Identity factors are
    /// dropped; repeated sites and out-of-range exponents are rejected.
    pub fn from_factors<I>(d: u8, factors: I) -> Result<Self>
    where
        I: IntoIterator<Item = Factor>,
    {
        if d < 2 {
            return Err(Error::InvalidString(format!("d = {d} < 2")));
        }
        let mut fs: Factors = factors.into_iter().collect();
        for &(site, e) in &fs {
            if e.v >= d || e.w >= d {
                return Err(Error::InvalidString(format!(
                    "exponents X{}Z{} at {site} out of range for d = {d}",
                    e.v, e.w
                )));
            }
        }
        fs.retain(|(_, e)| !e.is_identity());
        fs.sort_unstable_by_key(|&(s, _)| s);
        if fs.windows(2).any(|p| p[0].0 == p[1].0) {
            return Err(Error::InvalidString("repeated site".into()));
        }
        Ok(WeylString { d, factors: fs })
    }

    pub(crate) fn from_sorted_unchecked(d: u8, factors: Factors) -> Self {
        debug_assert!(factors.windows(2).all(|p| p[0].0 < p[1].0));
        debug_assert!(factors.iter().all(|(_, e)| !e.is_identity()));
        WeylString { d, factors }
    }

    pub fn d(&self) -> u8 {
        self.d
    }

    /// Non-identity factors in site order.
    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn support(&self) -> impl Iterator<Item = Site> + '_ {
        self.factors.iter().map(|&(s, _)| s)
    }

    /// Number of sites carrying a non-identity factor.
    pub fn weight(&self) -> usize {
        self.factors.len()
    }

    pub fn is_identity(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn exponents_at(&self, site: Site) -> LocalExponents {
        match self.factors.binary_search_by_key(&site, |&(s, _)| s) {
            Ok(i) => self.factors[i].1,
            Err(_) => LocalExponents::new(0, 0),
        }
    }

    /// Lexicographically smallest support site.
    pub fn min_site(&self) -> Option<Site> {
        self.factors.first().map(|&(s, _)| s)
    }

    pub fn translated(&self, by: Site) -> WeylString {
        WeylString {
            d: self.d,
            factors: self.factors.iter().map(|&(s, e)| (s.shifted(by), e)).collect(),
        }
    }

    /// Applies a site relabelling (for example a reduction modulo a ring
    /// length). The map must be injective on the support.
    pub fn relabelled<F: Fn(Site) -> Site>(&self, f: F) -> Result<WeylString> {
        WeylString::from_factors(self.d, self.factors.iter().map(|&(s, e)| (f(s), e)))
    }

    /// Translates the string by a lattice vector so that its minimal site
    /// lands in the fundamental cell `[0, period.x) × [0, period.y)`.
    /// Returns the translated string and the applied shift.
    pub fn anchored(&self, period: Site) -> Result<(WeylString, Site)> {
        let first = self.min_site().ok_or(Error::IdentityAnchor)?;
        let shift = anchor_shift(first, period);
        Ok((self.translated(shift), shift))
    }

    /// `ξ(w, v') = Σ_i w_i v'_i mod d` with `w` taken from `self` and `v'`
    /// from `other`; only common sites contribute.
    pub fn phase_exponent(&self, other: &WeylString) -> Result<u8> {
        check_dims(self.d, other.d)?;
        let (xi, _) = overlap_exponents(&self.factors, &other.factors);
        Ok((xi % self.d as u32) as u8)
    }

    /// `P1 P2 = ω^ξ P''` with the phase kept exact.
    pub fn multiply_exact(&self, other: &WeylString) -> Result<(Phase, WeylString)> {
        check_dims(self.d, other.d)?;
        let (xi, _) = overlap_exponents(&self.factors, &other.factors);
        let product = merge_product(self.d, &self.factors, &other.factors);
        Ok((
            Phase {
                exponent: (xi % self.d as u32) as u8,
                d: self.d,
            },
            WeylString::from_sorted_unchecked(self.d, product),
        ))
    }

    pub fn multiply(&self, other: &WeylString) -> Result<PhasedString> {
        let (phase, string) = self.multiply_exact(other)?;
        Ok(PhasedString::new(phase.to_complex(), string))
    }

    pub fn commutes_with(&self, other: &WeylString) -> Result<bool> {
        check_dims(self.d, other.d)?;
        let (a, b) = overlap_exponents(&self.factors, &other.factors);
        Ok(a % self.d as u32 == b % self.d as u32)
    }

    /// `[P1, P2] = (ω^{ξ(w,v')} − ω^{ξ(w',v)}) P''` as the exponent pair and
    /// product string, or `None` when the two exponents agree modulo `d`.
    pub fn commutator_exact(&self, other: &WeylString) -> Result<Option<(Phase, Phase, WeylString)>> {
        check_dims(self.d, other.d)?;
        Ok(commutator_factors(self.d, &self.factors, &other.factors)
            .map(|(p, m, f)| (p, m, WeylString::from_sorted_unchecked(self.d, f))))
    }

    pub fn commutator(&self, other: &WeylString) -> Result<Option<PhasedString>> {
        Ok(self
            .commutator_exact(other)?
            .map(|(plus, minus, s)| PhasedString::new(plus.to_complex() - minus.to_complex(), s)))
    }

    /// `(X^v Z^w)† = ω^{vw} X^{-v} Z^{-w}` site by site.
    pub fn adjoint_exact(&self) -> (Phase, WeylString) {
        let d = self.d as u32;
        let mut exponent = 0u32;
        let factors = self
            .factors
            .iter()
            .map(|&(s, e)| {
                exponent += e.v as u32 * e.w as u32;
                (
                    s,
                    LocalExponents::new(((d - e.v as u32) % d) as u8, ((d - e.w as u32) % d) as u8),
                )
            })
            .collect();
        (
            Phase {
                exponent: (exponent % d) as u8,
                d: self.d,
            },
            WeylString::from_sorted_unchecked(self.d, factors),
        )
    }

    pub fn adjoint(&self) -> PhasedString {
        let (phase, s) = self.adjoint_exact();
        PhasedString::new(phase.to_complex(), s)
    }

    /// Dense matrix of the string on `window`, Kronecker-ordered with
    /// `window[0]` as the most significant tensor factor.
    pub fn dense_matrix(&self, window: &[Site]) -> Result<DMatrix<Complex64>> {
        for s in self.support() {
            if !window.contains(&s) {
                return Err(Error::WindowMissesSite(s));
            }
        }
        let mut m = DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
        for &site in window {
            let e = self.exponents_at(site);
            m = m.kronecker(&local_matrix(self.d, e.v, e.w));
        }
        Ok(m)
    }
}

/// `X^v Z^w` as a `d × d` matrix: `(X^v Z^w)_{ij} = ω^{w j} δ_{i, j+v}`.
pub fn local_matrix(d: u8, v: u8, w: u8) -> DMatrix<Complex64> {
    let n = d as usize;
    let mut m = DMatrix::zeros(n, n);
    for j in 0..n {
        let i = (j + v as usize) % n;
        m[(i, j)] = omega_pow((w as u32 * j as u32) % d as u32, d);
    }
    m
}

pub(crate) fn anchor_shift(first: Site, period: Site) -> Site {
    let cell = |c: i16, p: i16| -> i16 { -(c.div_euclid(p) * p) };
    Site {
        x: cell(first.x, period.x.max(1)),
        y: cell(first.y, period.y.max(1)),
    }
}

/// Returns `(Σ w_a v_b, Σ w_b v_a)` over the common support, not reduced.
#[inline]
pub(crate) fn overlap_exponents(a: &[Factor], b: &[Factor]) -> (u32, u32) {
    let (mut i, mut j) = (0, 0);
    let (mut ab, mut ba) = (0u32, 0u32);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                let (ea, eb) = (a[i].1, b[j].1);
                ab += ea.w as u32 * eb.v as u32;
                ba += eb.w as u32 * ea.v as u32;
                i += 1;
                j += 1;
            }
        }
    }
    (ab, ba)
}

#[inline]
pub(crate) fn merge_product(d: u8, a: &[Factor], b: &[Factor]) -> Factors {
    let mut out = Factors::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            Ordering::Equal => {
                let (ea, eb) = (a[i].1, b[j].1);
                let e = LocalExponents::new((ea.v + eb.v) % d, (ea.w + eb.w) % d);
                if !e.is_identity() {
                    out.push((a[i].0, e));
                }
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

#[inline]
pub(crate) fn commutator_factors(d: u8, a: &[Factor], b: &[Factor]) -> Option<(Phase, Phase, Factors)> {
    let (ab, ba) = overlap_exponents(a, b);
    let (ab, ba) = ((ab % d as u32) as u8, (ba % d as u32) as u8);
    if ab == ba {
        return None;
    }
    Some((
        Phase { exponent: ab, d },
        Phase { exponent: ba, d },
        merge_product(d, a, b),
    ))
}

impl fmt::Display for WeylString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "d={};", self.d)?;
        if self.factors.is_empty() {
            return write!(f, " I");
        }
        for (s, e) in &self.factors {
            write!(f, " {}:X{}Z{}", s, e.v, e.w)?;
        }
        Ok(())
    }
}

fn parse_site(text: &str) -> Result<Site> {
    let inner = text
        .strip_prefix('(')
        .and_then(|t| t.strip_suffix(')'))
        .ok_or_else(|| Error::Parse(format!("bad site `{text}`")))?;
    let coords: Vec<i16> = inner
        .split(',')
        .map(|c| c.trim().parse::<i16>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Parse(format!("bad site `{text}`: {e}")))?;
    match coords.as_slice() {
        [x] => Ok(Site::new(*x)),
        [x, y] => Ok(Site::new_2d(*x, *y)),
        _ => Err(Error::Parse(format!("bad site `{text}`"))),
    }
}

fn parse_factor(token: &str) -> Result<Factor> {
    let (site, ops) = token
        .rsplit_once(':')
        .ok_or_else(|| Error::Parse(format!("bad factor `{token}`")))?;
    let site = parse_site(site)?;
    let ops = ops
        .strip_prefix('X')
        .ok_or_else(|| Error::Parse(format!("bad factor `{token}`")))?;
    let (v, w) = ops
        .split_once('Z')
        .ok_or_else(|| Error::Parse(format!("bad factor `{token}`")))?;
    let v = v.parse::<u8>().map_err(|e| Error::Parse(format!("`{token}`: {e}")))?;
    let w = w.parse::<u8>().map_err(|e| Error::Parse(format!("`{token}`: {e}")))?;
    Ok((site, LocalExponents::new(v, w)))
}

impl FromStr for WeylString {
    type Err = Error;

    /// Parses `d=3; (0):X1Z2 (1):X0Z1`, or `d=3; I` for the identity.
    fn from_str(text: &str) -> Result<Self> {
        let (head, body) = text
            .split_once(';')
            .ok_or_else(|| Error::Parse(format!("missing `;` in `{text}`")))?;
        let d = head
            .trim()
            .strip_prefix("d=")
            .and_then(|v| v.trim().parse::<u8>().ok())
            .ok_or_else(|| Error::Parse(format!("bad dimension in `{text}`")))?;
        let body = body.trim();
        if body == "I" || body.is_empty() {
            return WeylString::from_factors(d, std::iter::empty());
        }
        let factors = body.split_whitespace().map(parse_factor).collect::<Result<Vec<_>>>()?;
        WeylString::from_factors(d, factors)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn omega(d: u8) -> Complex64 {
        omega_pow(1, d)
    }

    fn x(d: u8, s: i16) -> WeylString {
        WeylString::single(d, Site::new(s), 1, 0)
    }

    fn z(d: u8, s: i16) -> WeylString {
        WeylString::single(d, Site::new(s), 0, 1)
    }

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-12
    }

    fn dense_close(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>, tol: f64) -> bool {
        (a - b).iter().all(|c| c.norm() < tol)
    }

    #[test]
    fn phase_exponent_examples() {
        let w = WeylString::single(3, Site::new(0), 0, 2);
        let v = WeylString::single(3, Site::new(0), 2, 0);
        assert_eq!(w.phase_exponent(&v).unwrap(), 1);

        let w = WeylString::single(3, Site::new(0), 0, 1);
        let v = WeylString::single(3, Site::new(1), 1, 0);
        assert_eq!(w.phase_exponent(&v).unwrap(), 0);

        assert_eq!(z(2, 0).phase_exponent(&x(2, 0)).unwrap(), 1);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let err = z(2, 0).multiply(&z(3, 0)).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { left: 2, right: 3 }));
        assert!(z(2, 0).commutator(&x(3, 0)).is_err());
        assert!(z(2, 0).phase_exponent(&x(3, 0)).is_err());
    }

    #[test]
    fn multiply_examples() {
        let xz = WeylString::single(3, Site::new(0), 1, 1);
        let p = x(3, 0).multiply(&z(3, 0)).unwrap();
        assert!(close(p.coeff, Complex64::new(1.0, 0.0)));
        assert_eq!(p.string, xz);

        let p = z(3, 0).multiply(&x(3, 0)).unwrap();
        assert!(close(p.coeff, omega(3)));
        assert_eq!(p.string, xz);

        let xz2 = WeylString::single(2, Site::new(0), 1, 1);
        let p = xz2.multiply(&xz2).unwrap();
        assert_eq!(p.coeff, Complex64::new(-1.0, 0.0));
        assert!(p.string.is_identity());
    }

    #[test]
    fn commutator_examples() {
        // [Z, X] = (ω − 1) XZ for d = 3, checked densely.
        let c = z(3, 0).commutator(&x(3, 0)).unwrap().unwrap();
        assert!(close(c.coeff, omega(3) - 1.0));
        assert_eq!(c.string, WeylString::single(3, Site::new(0), 1, 1));
        let w = [Site::new(0)];
        let zm = z(3, 0).dense_matrix(&w).unwrap();
        let xm = x(3, 0).dense_matrix(&w).unwrap();
        let dense = &zm * &xm - &xm * &zm;
        let ours = c.string.dense_matrix(&w).unwrap() * c.coeff;
        assert!(dense_close(&dense, &ours, 1e-12));

        for d in 2..6 {
            let z2 = WeylString::single(d, Site::new(0), 0, 2);
            assert!(z(d, 0).commutator(&z2).unwrap().is_none());
        }

        // d = 2: [σz, σx] = 2iσy and XZ = −iσy.
        let c = z(2, 0).commutator(&x(2, 0)).unwrap().unwrap();
        assert_eq!(c.coeff, Complex64::new(-2.0, 0.0));
        let sy = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, -1.0),
                Complex64::new(0.0, 1.0),
                Complex64::new(0.0, 0.0),
            ],
        );
        let ours = c.string.dense_matrix(&w).unwrap() * c.coeff;
        assert!(dense_close(&(sy * Complex64::new(0.0, 2.0)), &ours, 1e-12));
    }

    #[test]
    fn adjoint_examples() {
        let xz = WeylString::single(3, Site::new(0), 1, 1);
        let adj = xz.adjoint();
        assert!(close(adj.coeff, omega(3)));
        assert_eq!(adj.string, WeylString::single(3, Site::new(0), 2, 2));
        let back = adj.string.multiply(&xz).unwrap();
        assert!(close(back.coeff * adj.coeff, Complex64::new(1.0, 0.0)));
        assert!(back.string.is_identity());

        let a = z(2, 0).adjoint();
        assert_eq!(a.coeff, Complex64::new(1.0, 0.0));
        assert_eq!(a.string, z(2, 0));

        let a = x(3, 0).adjoint();
        assert_eq!(a.coeff, Complex64::new(1.0, 0.0));
        assert_eq!(a.string, WeylString::single(3, Site::new(0), 2, 0));
    }

    #[test]
    fn dense_matrix_examples() {
        let m = x(2, 0).dense_matrix(&[Site::new(0)]).unwrap();
        assert_eq!(m[(0, 1)], Complex64::new(1.0, 0.0));
        assert_eq!(m[(1, 0)], Complex64::new(1.0, 0.0));
        assert_eq!(m[(0, 0)], Complex64::new(0.0, 0.0));

        let m = z(3, 0).dense_matrix(&[Site::new(0)]).unwrap();
        for j in 0..3 {
            assert!(close(m[(j, j)], omega_pow(j as u32, 3)));
        }

        let m = WeylString::identity(2)
            .dense_matrix(&[Site::new(0), Site::new(1)])
            .unwrap();
        assert_eq!(m, DMatrix::identity(4, 4));

        let err = z(2, 5).dense_matrix(&[Site::new(0)]).unwrap_err();
        assert!(matches!(err, Error::WindowMissesSite(s) if s == Site::new(5)));
    }

    #[test]
    fn shift_clock_relation() {
        // X Z = ω^{-1} Z X
        for d in 2..7u8 {
            let w = [Site::new(0)];
            let xm = x(d, 0).dense_matrix(&w).unwrap();
            let zm = z(d, 0).dense_matrix(&w).unwrap();
            let lhs = &xm * &zm;
            let rhs = (&zm * &xm) * omega_pow(d as u32 - 1, d);
            assert!(dense_close(&lhs, &rhs, 1e-12));
        }
    }

    #[test]
    fn text_form_round_trips() {
        let s: WeylString = "d=3; (0):X1Z2 (1):X0Z1".parse().unwrap();
        assert_eq!(s.weight(), 2);
        assert_eq!(s.exponents_at(Site::new(0)), LocalExponents::new(1, 2));
        assert_eq!(s.to_string(), "d=3; (0):X1Z2 (1):X0Z1");
        let t: WeylString = "d=4; (2,-1):X3Z0 (0,5):X1Z1".parse().unwrap();
        assert_eq!(t.min_site(), Some(Site::new_2d(0, 5)));
        assert_eq!(t.to_string().parse::<WeylString>().unwrap(), t);
        let id: WeylString = "d=2; I".parse().unwrap();
        assert!(id.is_identity());
        assert!("d=3; (0):X3Z0".parse::<WeylString>().is_err());
        assert!("d=3; (0):X1Z0 (0):X0Z1".parse::<WeylString>().is_err());
        assert!("(0):X1Z0".parse::<WeylString>().is_err());
    }

    #[test]
    fn anchoring_respects_period() {
        let s: WeylString = "d=3; (5):X1Z0 (6):X0Z1".parse().unwrap();
        let (a, shift) = s.anchored(Site::new(1)).unwrap();
        assert_eq!(shift, Site::new(-5));
        assert_eq!(a.min_site(), Some(Site::ORIGIN));
        let (b, shift) = s.anchored(Site::new(2)).unwrap();
        assert_eq!(shift, Site::new(-4));
        assert_eq!(b.min_site(), Some(Site::new(1)));
        assert!(WeylString::identity(3).anchored(Site::new(1)).is_err());
    }
}
