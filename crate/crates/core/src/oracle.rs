//! Dense reference computations on small systems.
//!
//! Everything here is assembled from explicit matrices (spin matrices and
//! directly built clock/shift matrices) and never touches the string
//! algebra, so it can serve as an independent check of it.
//!
//! Two Lanczos references exist:
//! * [`dense_lanczos`] works with full `D × D` operator matrices on a finite
//!   ring (`D = d^L ≤ 4096`);
//! * [`window_lanczos`] keeps one dense local representative of a
//!   translation-invariant chain operator on a growing window and computes
//!   per-site inner products through partial traces. It gives
//!   thermodynamic-limit coefficients for nearest-neighbour chains where a
//!   full ring would not fit in memory.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::models::{spin_matrices, Extent, ModelSpec, SpinValue};

/// Largest Hilbert-space dimension accepted by [`dense_build`].
pub const BUILD_CAP: usize = 531_441; // 3^12
/// Largest Hilbert-space dimension for eigendecomposition.
pub const EIGEN_CAP: usize = 6_561; // 3^8
/// Largest Hilbert-space dimension for full operator matrices in
/// [`dense_lanczos`].
pub const OPERATOR_CAP: usize = 4_096;

type C = Complex64;

fn c(re: f64) -> C {
    C::new(re, 0.0)
}

/// Compressed sparse row matrix.
#[derive(Clone, Debug)]
pub struct SparseMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C>,
}

impl SparseMatrix {
    fn from_triplets(dim: usize, mut t: Vec<(usize, usize, C)>) -> Self {
        t.sort_unstable_by_key(|&(r, col, _)| (r, col));
        let mut row_ptr = vec![0; dim + 1];
        let mut cols = Vec::with_capacity(t.len());
        let mut vals: Vec<C> = Vec::with_capacity(t.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, col, v) in t {
            if last == Some((r, col)) {
                *vals.last_mut().unwrap() += v;
                continue;
            }
            last = Some((r, col));
            row_ptr[r + 1] += 1;
            cols.push(col);
            vals.push(v);
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        SparseMatrix {
            dim,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    fn row(&self, i: usize) -> impl Iterator<Item = (usize, C)> + '_ {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        self.cols[a..b].iter().copied().zip(self.vals[a..b].iter().copied())
    }

    pub fn to_dense(&self) -> DMatrix<C> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            for (j, v) in self.row(i) {
                m[(i, j)] += v;
            }
        }
        m
    }

    /// Largest `|M − M†|` entry.
    pub fn hermiticity_residual(&self) -> f64 {
        let m = self.to_dense_if_small();
        match m {
            Some(m) => (&m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max),
            None => {
                let mut worst: f64 = 0.0;
                for i in 0..self.dim {
                    for (j, v) in self.row(i) {
                        let back = self.row(j).find(|&(k, _)| k == i).map(|x| x.1).unwrap_or_default();
                        worst = worst.max((v - back.conj()).norm());
                    }
                }
                worst
            }
        }
    }

    fn to_dense_if_small(&self) -> Option<DMatrix<C>> {
        (self.dim <= EIGEN_CAP).then(|| self.to_dense())
    }
}

/// `X = Σ |j+1⟩⟨j|`, built directly.
pub fn shift_matrix(d: usize) -> DMatrix<C> {
    let mut m = DMatrix::zeros(d, d);
    for j in 0..d {
        m[((j + 1) % d, j)] = c(1.0);
    }
    m
}

/// `Z = Σ ω^j |j⟩⟨j|`, built directly.
pub fn clock_matrix(d: usize) -> DMatrix<C> {
    let mut m = DMatrix::zeros(d, d);
    for j in 0..d {
        let angle = 2.0 * std::f64::consts::PI * j as f64 / d as f64;
        m[(j, j)] = C::new(angle.cos(), angle.sin());
    }
    m
}

fn matrix_power(m: &DMatrix<C>, k: usize) -> DMatrix<C> {
    let mut out = DMatrix::identity(m.nrows(), m.ncols());
    for _ in 0..k {
        out = &out * m;
    }
    out
}

/// A local operator acting on an ordered list of sites.
#[derive(Clone, Debug)]
pub struct LocalTerm {
    pub sites: Vec<usize>,
    pub matrix: DMatrix<C>,
}

/// Explicit finite system: `H` and the observable `A` as sparse matrices on
/// `d^n` states, site 0 being the most significant tensor factor.
#[derive(Clone, Debug)]
pub struct DenseSystem {
    pub d: usize,
    pub sites: usize,
    pub h: SparseMatrix,
    pub a: SparseMatrix,
}

fn digits(mut index: usize, d: usize, n: usize) -> Vec<usize> {
    let mut out = vec![0; n];
    for k in (0..n).rev() {
        out[k] = index % d;
        index /= d;
    }
    out
}

fn undigits(ds: &[usize], d: usize) -> usize {
    ds.iter().fold(0, |acc, &x| acc * d + x)
}

/// Sums local terms into a sparse matrix on `n` sites.
pub fn assemble(d: usize, n: usize, terms: &[LocalTerm]) -> Result<SparseMatrix> {
    let dim = d
        .checked_pow(n as u32)
        .filter(|&x| x <= BUILD_CAP)
        .ok_or(Error::DenseCapExceeded {
            dim: d.saturating_pow(n as u32),
            cap: BUILD_CAP,
        })?;
    let mut triplets = Vec::new();
    for col in 0..dim {
        let ds = digits(col, d, n);
        for term in terms {
            let k = term.sites.len();
            let local_in = term.sites.iter().fold(0, |acc, &s| acc * d + ds[s]);
            for local_out in 0..d.pow(k as u32) {
                let v = term.matrix[(local_out, local_in)];
                if v.norm() == 0.0 {
                    continue;
                }
                let mut out = ds.clone();
                let outs = digits(local_out, d, k);
                for (idx, &s) in term.sites.iter().enumerate() {
                    out[s] = outs[idx];
                }
                triplets.push((undigits(&out, d), col, v));
            }
        }
    }
    Ok(SparseMatrix::from_triplets(dim, triplets))
}

/// Bonds of a lattice. On a two-site ring both directions join the same
/// pair; they are kept apart only when `typed` (alternating bond types).
fn chain_bonds(extent: Extent, typed: bool) -> Result<(usize, Vec<(usize, usize)>)> {
    match extent {
        Extent::Ring(n) => {
            let n = n as usize;
            let mut bonds: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
            if n == 2 && !typed {
                bonds.truncate(1);
            }
            Ok((n, bonds))
        }
        Extent::Open(n) => {
            let n = n as usize;
            Ok((n, (0..n - 1).map(|i| (i, i + 1)).collect()))
        }
        Extent::Torus(lx, ly) => {
            let (lx, ly) = (lx as usize, ly as usize);
            let idx = |x: usize, y: usize| x * ly + y;
            let mut bonds = Vec::new();
            for x in 0..lx {
                for y in 0..ly {
                    let right = (idx(x, y), idx((x + 1) % lx, y));
                    let up = (idx(x, y), idx(x, (y + 1) % ly));
                    for b in [right, up] {
                        let key = (b.0.min(b.1), b.0.max(b.1));
                        if !bonds.iter().any(|&(p, q): &(usize, usize)| (p.min(q), p.max(q)) == key) {
                            bonds.push(b);
                        }
                    }
                }
            }
            Ok((lx * ly, bonds))
        }
        Extent::Thermodynamic => Err(Error::InvalidModel("the dense oracle needs a finite lattice".into())),
    }
}

/// Local terms of a model on a finite lattice. The Potts `k = 0` bond term
/// (a constant) is omitted.
pub fn local_terms(spec: &ModelSpec) -> Result<(usize, Vec<LocalTerm>)> {
    spec.validate()?;
    let lattice = spec.lattice();
    let typed = matches!(spec, ModelSpec::KitaevPotts { .. });
    let (n, bonds) = chain_bonds(lattice.extent, typed)?;
    let mut terms = Vec::new();
    match spec {
        ModelSpec::Ising { j, hx, hz, spin, .. } => {
            let m = spin_matrices(*spin);
            let bond = m.sx.kronecker(&m.sx) * c(*j);
            let site = &m.sx * c(*hx) + &m.sz * c(*hz);
            for (a, b) in bonds {
                terms.push(LocalTerm {
                    sites: vec![a, b],
                    matrix: bond.clone(),
                });
            }
            for s in 0..n {
                terms.push(LocalTerm {
                    sites: vec![s],
                    matrix: site.clone(),
                });
            }
        }
        ModelSpec::Potts { d, j, h, .. } => {
            let d = *d as usize;
            let z = clock_matrix(d);
            let x = shift_matrix(d);
            let zz = z.kronecker(&z.adjoint());
            let mut bond = DMatrix::zeros(d * d, d * d);
            for k in 1..d {
                bond += matrix_power(&zz, k);
            }
            bond *= c(*j);
            let site = (&x + x.adjoint()) * c(*h);
            for (a, b) in bonds {
                terms.push(LocalTerm {
                    sites: vec![a, b],
                    matrix: bond.clone(),
                });
            }
            for s in 0..n {
                terms.push(LocalTerm {
                    sites: vec![s],
                    matrix: site.clone(),
                });
            }
        }
        ModelSpec::KitaevPotts {
            d,
            jx,
            jy,
            hermitian_closure,
            ..
        } => {
            let d = *d as usize;
            let z = clock_matrix(d);
            let x = shift_matrix(d);
            let xx = x.adjoint().kronecker(&x);
            let zz = z.adjoint().kronecker(&z);
            for (idx, (a, b)) in bonds.into_iter().enumerate() {
                let (m, coupling) = if idx % 2 == 0 {
                    (&xx, jx[(idx / 2) % jx.len()])
                } else {
                    (&zz, jy[(idx / 2) % jy.len()])
                };
                let mut op = m * c(coupling);
                if *hermitian_closure {
                    op = &op + op.adjoint();
                }
                terms.push(LocalTerm {
                    sites: vec![a, b],
                    matrix: op,
                });
            }
        }
    }
    Ok((n, terms))
}

/// Builds `H` and `A = Σ_i S^z_i` for a model on a finite lattice.
pub fn dense_build(spec: &ModelSpec) -> Result<DenseSystem> {
    let (n, terms) = local_terms(spec)?;
    let d = spec.d() as usize;
    let h = assemble(d, n, &terms)?;
    let sz = spin_matrices(SpinValue::from_dimension(d as u8)?).sz;
    let obs: Vec<LocalTerm> = (0..n)
        .map(|s| LocalTerm {
            sites: vec![s],
            matrix: sz.clone(),
        })
        .collect();
    let a = assemble(d, n, &obs)?;
    Ok(DenseSystem { d, sites: n, h, a })
}

impl DenseSystem {
    pub fn dim(&self) -> usize {
        self.h.dim()
    }

    /// Replaces the observable by a single-site operator.
    pub fn with_site_observable(mut self, site: usize, local: &DMatrix<C>) -> Result<Self> {
        self.a = assemble(
            self.d,
            self.sites,
            &[LocalTerm {
                sites: vec![site],
                matrix: local.clone(),
            }],
        )?;
        Ok(self)
    }
}

/// Row-major dense `D × D` operator.
struct DenseOp {
    dim: usize,
    data: Vec<C>,
}

impl DenseOp {
    fn from_sparse(m: &SparseMatrix) -> Self {
        let dim = m.dim();
        let mut data = vec![C::default(); dim * dim];
        for i in 0..dim {
            for (j, v) in m.row(i) {
                data[i * dim + j] += v;
            }
        }
        DenseOp { dim, data }
    }

    /// `(A|B) = tr(A†B)/D`
    fn inner(&self, other: &DenseOp) -> C {
        let s: C = self.data.iter().zip(&other.data).map(|(a, b)| a.conj() * b).sum();
        s / self.dim as f64
    }

    fn scale(&mut self, a: f64) {
        for x in &mut self.data {
            *x *= a;
        }
    }

    fn axpy(&mut self, alpha: f64, x: &DenseOp) {
        for (y, x) in self.data.iter_mut().zip(&x.data) {
            *y += x * alpha;
        }
    }

    /// `[H, self]` with sparse `H`.
    fn commutator(h: &SparseMatrix, a: &DenseOp) -> DenseOp {
        let dim = a.dim;
        let mut out = vec![C::default(); dim * dim];
        out.par_chunks_mut(dim).enumerate().for_each(|(i, row)| {
            for (k, hv) in h.row(i) {
                let src = &a.data[k * dim..(k + 1) * dim];
                for (r, s) in row.iter_mut().zip(src) {
                    *r += hv * s;
                }
            }
            let arow = &a.data[i * dim..(i + 1) * dim];
            for (k, &av) in arow.iter().enumerate() {
                if av.norm_sqr() == 0.0 {
                    continue;
                }
                for (j, hv) in h.row(k) {
                    row[j] -= av * hv;
                }
            }
        });
        DenseOp { dim, data: out }
    }
}

/// Lanczos coefficients `b_1..b_{n_max}` from explicit matrix commutators
/// and the trace inner product. Stops early if the Krylov space closes.
pub fn dense_lanczos(sys: &DenseSystem, n_max: usize) -> Result<Vec<f64>> {
    if sys.dim() > OPERATOR_CAP {
        return Err(Error::DenseCapExceeded {
            dim: sys.dim(),
            cap: OPERATOR_CAP,
        });
    }
    let mut cur = DenseOp::from_sparse(&sys.a);
    let n0 = cur.inner(&cur).re.sqrt();
    if n0 == 0.0 {
        return Err(Error::ZeroOperator);
    }
    cur.scale(1.0 / n0);
    let mut prev: Option<DenseOp> = None;
    let mut b: Vec<f64> = Vec::with_capacity(n_max);
    for _ in 0..n_max {
        let mut next = DenseOp::commutator(&sys.h, &cur);
        if let (Some(p), Some(&last)) = (&prev, b.last()) {
            next.axpy(-last, p);
        }
        let bn = next.inner(&next).re.sqrt();
        if bn < crate::lanczos::EXHAUSTION_THRESHOLD {
            break;
        }
        next.scale(1.0 / bn);
        b.push(bn);
        prev = Some(std::mem::replace(&mut cur, next));
    }
    Ok(b)
}

/// `C(t) = tr(A(t) A)/tr(A²)` by exact diagonalization of `H`.
pub fn dense_autocorr(sys: &DenseSystem, times: &[f64]) -> Result<Vec<f64>> {
    if sys.dim() > EIGEN_CAP {
        return Err(Error::DenseCapExceeded {
            dim: sys.dim(),
            cap: EIGEN_CAP,
        });
    }
    let eig = SymmetricEigen::new(sys.h.to_dense());
    let u = &eig.eigenvectors;
    let a = u.adjoint() * sys.a.to_dense() * u;
    let e = &eig.eigenvalues;
    let dim = sys.dim();
    let mut weights = Vec::with_capacity(dim * dim);
    let mut total = 0.0;
    for m in 0..dim {
        for n in 0..dim {
            let w = a[(m, n)].norm_sqr();
            if w > 0.0 {
                weights.push((e[m] - e[n], w));
                total += w;
            }
        }
    }
    if total == 0.0 {
        return Err(Error::ZeroOperator);
    }
    Ok(times
        .iter()
        .map(|&t| weights.iter().map(|&(de, w)| w * (de * t).cos()).sum::<f64>() / total)
        .collect())
}

/// Dense local operator on a contiguous window of chain sites.
#[derive(Clone, Debug)]
struct WindowOp {
    width: usize,
    m: DMatrix<C>,
}

/// `(I_{d^s} ⊗ op ⊗ I) · x` for `op` on sites `[s, s+k)` of a `width`-site window.
fn left_apply(d: usize, width: usize, s: usize, k: usize, op: &DMatrix<C>, x: &DMatrix<C>) -> DMatrix<C> {
    let dim = d.pow(width as u32);
    let inner = d.pow(k as u32);
    let lo = d.pow((width - s - k) as u32);
    let mut out = DMatrix::zeros(dim, dim);
    for col in 0..dim {
        for hi in 0..d.pow(s as u32) {
            for low in 0..lo {
                for mid in 0..inner {
                    let r = (hi * inner + mid) * lo + low;
                    let mut acc = C::default();
                    for mid2 in 0..inner {
                        let v = op[(mid, mid2)];
                        if v.norm_sqr() != 0.0 {
                            acc += v * x[((hi * inner + mid2) * lo + low, col)];
                        }
                    }
                    out[(r, col)] = acc;
                }
            }
        }
    }
    out
}

/// `x · (I ⊗ op ⊗ I)`.
fn right_apply(d: usize, width: usize, s: usize, k: usize, op: &DMatrix<C>, x: &DMatrix<C>) -> DMatrix<C> {
    // x·E = (E†·x†)†
    left_apply(d, width, s, k, &op.adjoint(), &x.adjoint()).adjoint()
}

fn pad_right(d: usize, x: &WindowOp, width: usize) -> WindowOp {
    let extra = d.pow((width - x.width) as u32);
    WindowOp {
        width,
        m: x.m.kronecker(&DMatrix::<C>::identity(extra, extra)),
    }
}

fn pad_left(d: usize, x: &WindowOp, by: usize) -> WindowOp {
    let extra = d.pow(by as u32);
    WindowOp {
        width: x.width + by,
        m: DMatrix::<C>::identity(extra, extra).kronecker(&x.m),
    }
}

/// Keeps sites `[lo, hi)` of a window operator, tracing out the rest.
fn partial_trace(d: usize, x: &WindowOp, lo: usize, hi: usize) -> DMatrix<C> {
    let keep = d.pow((hi - lo) as u32);
    let left = d.pow(lo as u32);
    let right = d.pow((x.width - hi) as u32);
    let mut out = DMatrix::zeros(keep, keep);
    for i in 0..keep {
        for j in 0..keep {
            let mut acc = C::default();
            for a in 0..left {
                for b in 0..right {
                    acc += x.m[((a * keep + i) * right + b, (a * keep + j) * right + b)];
                }
            }
            out[(i, j)] = acc;
        }
    }
    out
}

/// Per-site inner product `Σ_k (x | T^k y)` of translation sums.
fn window_inner(d: usize, x: &WindowOp, y: &WindowOp) -> C {
    let mut total = C::default();
    for k in -(y.width as isize - 1)..(x.width as isize) {
        // y occupies [k, k + y.width)
        let lo = k.max(0) as usize;
        let hi = (x.width as isize).min(k + y.width as isize) as usize;
        let union = (x.width as isize).max(k + y.width as isize) - k.min(0);
        let xr = partial_trace(d, x, lo, hi);
        let ylo = (lo as isize - k) as usize;
        let yhi = (hi as isize - k) as usize;
        let yr = partial_trace(d, y, ylo, yhi);
        let t: C = xr.iter().zip(yr.iter()).map(|(a, b)| a.conj() * b).sum();
        total += t / (d as f64).powi(union as i32);
    }
    total
}

/// Thermodynamic-limit Lanczos coefficients of `Σ_i T^i seed` for the chain
/// Hamiltonian `Σ_i T^i (site_term + bond_term)`, where `bond_term` acts on
/// sites `(0, 1)`.
pub fn window_lanczos(
    site_term: &DMatrix<C>,
    bond_term: &DMatrix<C>,
    seed: &DMatrix<C>,
    n_max: usize,
) -> Result<Vec<f64>> {
    let d = site_term.nrows();
    let liouvillian = |x: &WindowOp| -> WindowOp {
        let w = x.width + 1;
        let right = pad_right(d, x, w);
        let left = pad_left(d, x, 1);
        let mut out = DMatrix::zeros(right.m.nrows(), right.m.ncols());
        for s in 0..x.width {
            out += left_apply(d, w, s, 1, site_term, &right.m) - right_apply(d, w, s, 1, site_term, &right.m);
        }
        for s in 0..x.width {
            out += left_apply(d, w, s, 2, bond_term, &right.m) - right_apply(d, w, s, 2, bond_term, &right.m);
        }
        // bond (-1, 0), translated by one site
        out += left_apply(d, w, 0, 2, bond_term, &left.m) - right_apply(d, w, 0, 2, bond_term, &left.m);
        WindowOp { width: w, m: out }
    };

    let mut cur = WindowOp {
        width: 1,
        m: seed.clone(),
    };
    let n0 = window_inner(d, &cur, &cur).re.sqrt();
    if n0 == 0.0 {
        return Err(Error::ZeroOperator);
    }
    cur.m /= c(n0);
    let mut prev: Option<WindowOp> = None;
    let mut b: Vec<f64> = Vec::new();
    for _ in 0..n_max {
        let mut next = liouvillian(&cur);
        if let (Some(p), Some(&last)) = (&prev, b.last()) {
            let p = pad_right(d, p, next.width);
            next.m -= p.m * c(last);
        }
        let bn = window_inner(d, &next, &next).re.sqrt();
        if bn < crate::lanczos::EXHAUSTION_THRESHOLD {
            break;
        }
        next.m /= c(bn);
        b.push(bn);
        prev = Some(std::mem::replace(&mut cur, next));
    }
    Ok(b)
}

/// Site and bond terms of a uniform nearest-neighbour chain model, for
/// [`window_lanczos`].
pub fn chain_cell(spec: &ModelSpec) -> Result<(DMatrix<C>, DMatrix<C>)> {
    let ring = spec.with_extent(Extent::Ring(3));
    let (_, terms) = local_terms(&ring)?;
    if matches!(spec, ModelSpec::KitaevPotts { .. }) {
        return Err(Error::InvalidModel("Kitaev-Potts has a two-site cell".into()));
    }
    let site = terms
        .iter()
        .find(|t| t.sites == [0])
        .map(|t| t.matrix.clone())
        .ok_or_else(|| Error::Internal("no site term".into()))?;
    let bond = terms
        .iter()
        .find(|t| t.sites == [0, 1])
        .map(|t| t.matrix.clone())
        .ok_or_else(|| Error::Internal("no bond term".into()))?;
    Ok((site, bond))
}
