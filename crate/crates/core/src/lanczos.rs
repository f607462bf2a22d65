//! Three-term Lanczos recurrence for the Liouvillian `L = [H, ·]`.
//!
//! With `A_0 = A/‖A‖` and `A_{-1} = 0`,
//! `b_n A_n = L A_{n-1} − b_{n-1} A_{n-2}`, `b_n = ‖L A_{n-1} − b_{n-1} A_{n-2}‖`.
//! Only the two most recent vectors are kept unless verification mode is on.

use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{apply_liouvillian, axpy, OperatorVector, TermList};

/// Default cap on live amplitude entries across the Lanczos vectors.
pub const DEFAULT_BUDGET: usize = 200_000_000;

/// `b_n` below this closes the Krylov space.
pub const EXHAUSTION_THRESHOLD: f64 = 1e-10;

/// Largest `n` for which the verification mode stores every vector.
pub const VERIFY_MAX_N: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum Termination {
    MaxIterations,
    /// `b_n` fell below [`EXHAUSTION_THRESHOLD`]; `n` is the first index not
    /// returned.
    SubspaceExhausted {
        n: usize,
    },
    /// Storing `A_n` would exceed the string budget.
    BudgetExceeded {
        n: usize,
    },
}

#[derive(Clone, Debug)]
pub struct LanczosOptions {
    pub n_max: usize,
    pub budget: usize,
    /// Store every `A_n` and fully reorthogonalize (small `n` only).
    pub verify: bool,
}

impl LanczosOptions {
    pub fn new(n_max: usize) -> Self {
        LanczosOptions {
            n_max,
            budget: DEFAULT_BUDGET,
            verify: false,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LanczosResult {
    /// `b_1, b_2, …`
    pub b: Vec<f64>,
    /// Stored string count of `A_n`, aligned with `b`.
    pub support_sizes: Vec<usize>,
    pub terminated: Termination,
    /// All Lanczos vectors `A_0, A_1, …` in verification mode.
    #[serde(skip)]
    pub vectors: Option<Vec<OperatorVector>>,
}

/// Resumable recurrence state: the last two vectors and the coefficients so
/// far.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LanczosState {
    pub prev: OperatorVector,
    pub cur: OperatorVector,
    pub b: Vec<f64>,
    pub support_sizes: Vec<usize>,
}

impl LanczosState {
    pub fn start(a: &OperatorVector) -> Result<Self> {
        let norm = a.norm();
        if norm == 0.0 {
            return Err(Error::ZeroOperator);
        }
        Ok(LanczosState {
            prev: OperatorVector::zero(a.d(), a.mode()),
            cur: a.clone().scaled(Complex64::new(1.0 / norm, 0.0)),
            b: Vec::new(),
            support_sizes: Vec::new(),
        })
    }

    pub fn write_snapshot<W: Write>(&self, out: W) -> Result<()> {
        bincode::serialize_into(out, self)?;
        Ok(())
    }

    pub fn read_snapshot<R: Read>(input: R) -> Result<Self> {
        Ok(bincode::deserialize_from(input)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Step {
    Coefficient(f64),
    Done(Termination),
}

/// Step-by-step driver; use [`run_lanczos`] unless checkpoints are needed.
pub struct Lanczos<'h> {
    h: &'h TermList,
    state: LanczosState,
    history: Option<Vec<OperatorVector>>,
}

impl<'h> Lanczos<'h> {
    pub fn new(h: &'h TermList, a: &OperatorVector, verify: bool) -> Result<Self> {
        h.require_hermitian()?;
        let state = LanczosState::start(a)?;
        let history = verify.then(|| vec![state.cur.clone()]);
        Ok(Lanczos { h, state, history })
    }

    pub fn resume(h: &'h TermList, state: LanczosState) -> Result<Self> {
        h.require_hermitian()?;
        Ok(Lanczos {
            h,
            state,
            history: None,
        })
    }

    pub fn state(&self) -> &LanczosState {
        &self.state
    }

    pub fn into_state(self) -> LanczosState {
        self.state
    }

    /// Computes the next coefficient. Budget and exhaustion leave the state
    /// unchanged.
    pub fn step(&mut self, budget: usize) -> Result<Step> {
        let n = self.state.b.len() + 1;
        let mut next = apply_liouvillian(self.h, &self.state.cur)?;
        if let Some(&last) = self.state.b.last() {
            next = axpy(Complex64::new(-last, 0.0), &self.state.prev, &next)?;
        }
        if let Some(all) = &self.history {
            for _ in 0..2 {
                for v in all {
                    let overlap = v.inner(&next)?;
                    next = axpy(-overlap, v, &next)?;
                }
            }
        }
        if next.len() + self.state.cur.len() > budget {
            return Ok(Step::Done(Termination::BudgetExceeded { n }));
        }
        let bn = next.norm();
        if bn < EXHAUSTION_THRESHOLD {
            return Ok(Step::Done(Termination::SubspaceExhausted { n }));
        }
        let next = next.scaled(Complex64::new(1.0 / bn, 0.0));
        self.state.support_sizes.push(next.len());
        self.state.b.push(bn);
        if let Some(all) = &mut self.history {
            all.push(next.clone());
        }
        self.state.prev = std::mem::replace(&mut self.state.cur, next);
        Ok(Step::Coefficient(bn))
    }

    pub fn finish(self, terminated: Termination) -> LanczosResult {
        LanczosResult {
            b: self.state.b,
            support_sizes: self.state.support_sizes,
            terminated,
            vectors: self.history,
        }
    }
}

/// Runs the recurrence until `n_max` coefficients, exhaustion or budget.
pub fn run_lanczos(h: &TermList, a: &OperatorVector, opts: &LanczosOptions) -> Result<LanczosResult> {
    let verify = opts.verify && opts.n_max <= VERIFY_MAX_N;
    let mut run = Lanczos::new(h, a, verify)?;
    drive(&mut run, opts.n_max, opts.budget).map(|t| run.finish(t))
}

/// Continues a checkpointed run up to `n_max` total coefficients.
pub fn resume_lanczos(h: &TermList, state: LanczosState, opts: &LanczosOptions) -> Result<LanczosResult> {
    let mut run = Lanczos::resume(h, state)?;
    drive(&mut run, opts.n_max, opts.budget).map(|t| run.finish(t))
}

fn drive(run: &mut Lanczos<'_>, n_max: usize, budget: usize) -> Result<Termination> {
    while run.state.b.len() < n_max {
        if let Step::Done(t) = run.step(budget)? {
            return Ok(t);
        }
    }
    Ok(Termination::MaxIterations)
}

/// Even moments `μ_{2k} = (T^{2k})_{00}`, `k = 0..=k_max`, of the tridiagonal
/// matrix with zero diagonal and off-diagonal `b_1, b_2, …`.
pub fn moments_from_b(b: &[f64], k_max: usize) -> Result<Vec<f64>> {
    if b.len() < k_max {
        return Err(Error::NotEnoughCoefficients {
            needed: k_max,
            available: b.len(),
        });
    }
    // μ_{2k} = ‖T^k e_0‖², and T^k e_0 lives on indices 0..=k
    let mut v = vec![0.0; k_max + 1];
    v[0] = 1.0;
    let mut out = Vec::with_capacity(k_max + 1);
    out.push(1.0);
    for k in 1..=k_max {
        let mut next = vec![0.0; k_max + 1];
        for i in 0..=k {
            let mut x = 0.0;
            if i > 0 {
                x += b[i - 1] * v[i - 1];
            }
            if i < k_max && i < b.len() {
                x += b[i] * v[i + 1];
            }
            next[i] = x;
        }
        v = next;
        out.push(v.iter().map(|x| x * x).sum());
    }
    Ok(out)
}
