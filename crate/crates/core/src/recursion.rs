//! Fits of Lanczos coefficient sequences, extrapolation, and the
//! autocorrelation function from the semi-infinite recursion chain.

use levenberg_marquardt::{LeastSquaresProblem, LevenbergMarquardt, TerminationReason};
use nalgebra::{storage::Owned, DMatrix, DVector, Dyn, OMatrix, OVector, U3};
use ode_solvers::{Dopri5, OutputType, System};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_N_MIN: usize = 2;
pub const DEFAULT_N_TOTAL: usize = 400;
pub const RTOL: f64 = 1e-10;
pub const ATOL: f64 = 1e-12;
pub const REFLECTION_THRESHOLD: f64 = 1e-8;
const C_STARTS: [f64; 4] = [0.5, 1.0, 2.0, 4.0];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitForm {
    /// `α n + γ + (−1)^n α / (log n + c)`
    LinearLog,
    /// `α + γ √n`
    Sqrt,
}

impl std::fmt::Display for FitForm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FitForm::LinearLog => "linear_log",
            FitForm::Sqrt => "sqrt",
        })
    }
}

impl std::str::FromStr for FitForm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear_log" | "linear-log" => Ok(FitForm::LinearLog),
            "sqrt" => Ok(FitForm::Sqrt),
            other => Err(Error::Parse(format!("unknown fit form `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitParams {
    pub form: FitForm,
    pub alpha: f64,
    pub gamma: f64,
    /// Only meaningful for [`FitForm::LinearLog`].
    pub c: f64,
    /// Inclusive range of `n` used.
    pub n_range: (usize, usize),
    pub rms: f64,
}

impl FitParams {
    pub fn eval(&self, n: usize) -> f64 {
        let x = n as f64;
        match self.form {
            FitForm::LinearLog => {
                let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
                self.alpha * x + self.gamma + sign * self.alpha / (x.ln() + self.c)
            }
            FitForm::Sqrt => self.alpha + self.gamma * x.sqrt(),
        }
    }
}

/// Least-squares fit of `b` (with `b[0] = b_1`) over `n_min ≤ n ≤ n_max`.
pub fn fit_bn(b: &[f64], form: FitForm, n_min: usize, n_max: Option<usize>) -> Result<FitParams> {
    let n_min = n_min.max(1);
    let hi = n_max.unwrap_or(b.len()).min(b.len());
    let points: Vec<(f64, f64)> = (n_min..=hi).map(|n| (n as f64, b[n - 1])).collect();
    if points.len() < 4 {
        return Err(Error::TooFewPoints {
            needed: 4,
            available: points.len(),
            n_min,
        });
    }
    let mut fit = match form {
        FitForm::Sqrt => fit_sqrt(&points)?,
        FitForm::LinearLog => fit_linear_log(&points, n_min)?,
    };
    fit.n_range = (n_min, hi);
    let ss: f64 = points.iter().map(|&(n, y)| (fit.eval(n as usize) - y).powi(2)).sum();
    fit.rms = (ss / points.len() as f64).sqrt();
    Ok(fit)
}

fn fit_sqrt(points: &[(f64, f64)]) -> Result<FitParams> {
    let a = DMatrix::from_fn(points.len(), 2, |i, j| if j == 0 { 1.0 } else { points[i].0.sqrt() });
    let y = DVector::from_iterator(points.len(), points.iter().map(|p| p.1));
    let sol = a.svd(true, true).solve(&y, 1e-14).map_err(|_| Error::FitNotConverged)?;
    Ok(FitParams {
        form: FitForm::Sqrt,
        alpha: sol[0],
        gamma: sol[1],
        c: 0.0,
        n_range: (0, 0),
        rms: 0.0,
    })
}

/// `c = e^u − log n_min` keeps `log n + c > 0` on the whole range.
struct LinearLogProblem<'a> {
    points: &'a [(f64, f64)],
    shift: f64,
    p: OVector<f64, U3>,
}

impl LinearLogProblem<'_> {
    fn c(&self) -> f64 {
        self.p[2].exp() - self.shift
    }
}

impl LeastSquaresProblem<f64, Dyn, U3> for LinearLogProblem<'_> {
    type ResidualStorage = Owned<f64, Dyn>;
    type JacobianStorage = Owned<f64, Dyn, U3>;
    type ParameterStorage = Owned<f64, U3>;

    fn set_params(&mut self, x: &OVector<f64, U3>) {
        self.p = *x;
    }

    fn params(&self) -> OVector<f64, U3> {
        self.p
    }

    fn residuals(&self) -> Option<OVector<f64, Dyn>> {
        let (alpha, gamma, c) = (self.p[0], self.p[1], self.c());
        let r = self.points.iter().map(|&(n, y)| {
            let sign = if (n as usize).is_multiple_of(2) { 1.0 } else { -1.0 };
            alpha * n + gamma + sign * alpha / (n.ln() + c) - y
        });
        Some(OVector::<f64, Dyn>::from_iterator(self.points.len(), r))
    }

    fn jacobian(&self) -> Option<OMatrix<f64, Dyn, U3>> {
        let (alpha, c, eu) = (self.p[0], self.c(), self.p[2].exp());
        let mut j = OMatrix::<f64, Dyn, U3>::zeros(self.points.len());
        for (i, &(n, _)) in self.points.iter().enumerate() {
            let sign = if (n as usize).is_multiple_of(2) { 1.0 } else { -1.0 };
            let l = n.ln() + c;
            j[(i, 0)] = n + sign / l;
            j[(i, 1)] = 1.0;
            j[(i, 2)] = -sign * alpha * eu / (l * l);
        }
        Some(j)
    }
}

fn fit_linear_log(points: &[(f64, f64)], n_min: usize) -> Result<FitParams> {
    let shift = (n_min as f64).ln();
    // straight-line start for (α, γ)
    let lin = {
        let a = DMatrix::from_fn(points.len(), 2, |i, j| if j == 0 { points[i].0 } else { 1.0 });
        let y = DVector::from_iterator(points.len(), points.iter().map(|p| p.1));
        a.svd(true, true).solve(&y, 1e-14).map_err(|_| Error::FitNotConverged)?
    };
    let solver = LevenbergMarquardt::new()
        .with_ftol(1e-15)
        .with_xtol(1e-15)
        .with_gtol(1e-15)
        .with_patience(2000);
    let mut best: Option<(f64, OVector<f64, U3>)> = None;
    for c0 in C_STARTS {
        let problem = LinearLogProblem {
            points,
            shift,
            p: OVector::<f64, U3>::new(lin[0], lin[1], (c0 + shift).ln()),
        };
        let (done, report) = solver.minimize(problem);
        let ok = matches!(
            report.termination,
            TerminationReason::Converged { .. } | TerminationReason::ResidualsZero | TerminationReason::Orthogonal
        ) || matches!(report.termination, TerminationReason::NoImprovementPossible(_));
        let obj = report.objective_function;
        if ok && obj.is_finite() && done.p.iter().all(|x| x.is_finite()) && best.as_ref().is_none_or(|b| obj < b.0) {
            best = Some((obj, done.p));
        }
    }
    let (_, p) = best.ok_or(Error::FitNotConverged)?;
    Ok(FitParams {
        form: FitForm::LinearLog,
        alpha: p[0],
        gamma: p[1],
        c: p[2].exp() - shift,
        n_range: (0, 0),
        rms: 0.0,
    })
}

/// Measured coefficients followed by the fit formula up to `n_total` entries.
pub fn extrapolate_bn(measured: &[f64], fit: &FitParams, n_total: usize) -> Result<Vec<f64>> {
    if n_total < measured.len() {
        return Err(Error::NotEnoughCoefficients {
            needed: measured.len(),
            available: n_total,
        });
    }
    let mut out = measured.to_vec();
    for n in measured.len() + 1..=n_total {
        let v = fit.eval(n);
        if v.is_nan() || v <= 0.0 {
            return Err(Error::UnphysicalExtrapolation { n, value: v });
        }
        out.push(v);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AutocorrSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// Number of coefficients driving the chain.
    pub chain_length: usize,
    /// Largest `|Σ φ_n² − 1|` seen at the grid points.
    pub norm_drift: f64,
    pub fingerprint: String,
}

struct Chain<'a> {
    b: &'a [f64],
}

impl System<f64, DVector<f64>> for Chain<'_> {
    fn system(&self, _t: f64, y: &DVector<f64>, dy: &mut DVector<f64>) {
        let n = y.len();
        for i in 0..n {
            let down = if i > 0 { self.b[i - 1] * y[i - 1] } else { 0.0 };
            let up = if i + 1 < n { self.b[i] * y[i + 1] } else { 0.0 };
            dy[i] = down - up;
        }
    }
}

/// `C(t) = φ_0(t)` for the chain `dφ_n/dt = b_n φ_{n−1} − b_{n+1} φ_{n+1}`
/// on sites `0..=b.len()`. Fails if the last site picks up amplitude above
/// [`REFLECTION_THRESHOLD`].
pub fn autocorrelation(b: &[f64], times: &[f64]) -> Result<AutocorrSeries> {
    integrate_chain(b, times, true)
}

/// As [`autocorrelation`] but for a Krylov space that closed exactly, where
/// the end of the chain is physical and no reflection check applies.
pub fn autocorrelation_closed(b: &[f64], times: &[f64]) -> Result<AutocorrSeries> {
    integrate_chain(b, times, false)
}

fn integrate_chain(b: &[f64], times: &[f64], check_reflection: bool) -> Result<AutocorrSeries> {
    if times.is_empty()
        || times[0] < 0.0
        || times
            .windows(2)
            .any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater))
    {
        return Err(Error::BadTimeGrid);
    }
    if b.iter().any(|x| x.is_nan() || *x < 0.0) {
        return Err(Error::Parse("Lanczos coefficients must be nonnegative".into()));
    }
    let sites = b.len() + 1;
    let mut y = DVector::zeros(sites);
    y[0] = 1.0;
    let mut t = 0.0;
    let mut values = Vec::with_capacity(times.len());
    let mut norm_drift: f64 = 0.0;
    for &target in times {
        if target > t {
            let mut solver = Dopri5::new(Chain { b }, t, target, target - t, y.clone(), RTOL, ATOL);
            solver.set_output(OutputType::Sparse);
            solver
                .integrate()
                .map_err(|e| Error::Internal(format!("chain integration failed: {e:?}")))?;
            if check_reflection && sites > 1 {
                for (ts, ys) in solver.x_out().iter().zip(solver.y_out()) {
                    let edge = ys[sites - 1].abs();
                    if edge > REFLECTION_THRESHOLD {
                        return Err(Error::BoundaryReflection {
                            time: *ts,
                            amplitude: edge,
                        });
                    }
                }
            }
            y = solver.y_out().last().cloned().unwrap_or(y);
            t = target;
        }
        norm_drift = norm_drift.max((y.norm_squared() - 1.0).abs());
        values.push(y[0]);
    }
    Ok(AutocorrSeries {
        times: times.to_vec(),
        values,
        chain_length: b.len(),
        norm_drift,
        fingerprint: format!(
            "chain N={} rtol={RTOL:e} atol={ATOL:e} reflection_check={check_reflection}",
            b.len()
        ),
    })
}

/// Evenly spaced grid `0, dt, …, t_max`.
pub fn time_grid(t_max: f64, steps: usize) -> Vec<f64> {
    (0..=steps).map(|k| t_max * k as f64 / steps as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lanczos::moments_from_b;

    fn synth_linear_log(alpha: f64, gamma: f64, c: f64, ns: std::ops::RangeInclusive<usize>) -> Vec<f64> {
        let p = FitParams {
            form: FitForm::LinearLog,
            alpha,
            gamma,
            c,
            n_range: (0, 0),
            rms: 0.0,
        };
        (1..=*ns.end()).map(|n| p.eval(n)).collect()
    }

    #[test]
    fn linear_log_round_trip() {
        let b = synth_linear_log(0.71, 1.07, 1.16, 2..=20);
        let fit = fit_bn(&b, FitForm::LinearLog, 2, None).unwrap();
        assert!((fit.alpha - 0.71).abs() < 1e-6, "{fit:?}");
        assert!((fit.gamma - 1.07).abs() < 1e-6);
        assert!((fit.c - 1.16).abs() < 1e-6);
        assert!(fit.rms < 1e-9);
        assert_eq!(fit.n_range, (2, 20));
    }

    #[test]
    fn sqrt_round_trip_and_constant() {
        let b: Vec<f64> = (1..=12).map(|n| -0.34 + 2.86 * (n as f64).sqrt()).collect();
        let fit = fit_bn(&b, FitForm::Sqrt, 2, None).unwrap();
        assert!((fit.alpha + 0.34).abs() < 1e-12 && (fit.gamma - 2.86).abs() < 1e-12);

        let fit = fit_bn(&[3.0; 8], FitForm::Sqrt, 2, None).unwrap();
        assert!((fit.alpha - 3.0).abs() < 1e-12 && fit.gamma.abs() < 1e-12);
    }

    #[test]
    fn too_few_points() {
        let err = fit_bn(&[1.0, 2.0, 3.0, 4.0], FitForm::Sqrt, 2, None).unwrap_err();
        assert!(matches!(err, Error::TooFewPoints { available: 3, .. }));
    }

    #[test]
    fn extrapolation_properties() {
        let b = synth_linear_log(0.71, 1.07, 1.16, 2..=12);
        let fit = fit_bn(&b, FitForm::LinearLog, 2, None).unwrap();
        assert_eq!(extrapolate_bn(&b, &fit, b.len()).unwrap(), b);
        let ext = extrapolate_bn(&b, &fit, 10_001).unwrap();
        assert_eq!(&ext[..b.len()], &b[..]);
        // the alternating part decays like 1/log n, so compare same-parity terms
        assert!(((ext[10_001 - 1] - ext[9_999 - 1]) / 2.0 - fit.alpha).abs() < 1e-3);
        let n = 10_000.0_f64;
        let odd_step = ext[10_000] - ext[9_999];
        let expected = fit.alpha - fit.alpha * (1.0 / ((n + 1.0).ln() + fit.c) + 1.0 / (n.ln() + fit.c));
        assert!((odd_step - expected).abs() < 1e-9);

        let sq = FitParams {
            form: FitForm::Sqrt,
            alpha: -0.34,
            gamma: 2.86,
            c: 0.0,
            n_range: (2, 12),
            rms: 0.0,
        };
        let ext = extrapolate_bn(&[1.0], &sq, 400).unwrap();
        for n in [10usize, 50, 100] {
            assert!(((ext[4 * n - 1] - sq.alpha) - 2.0 * (ext[n - 1] - sq.alpha)).abs() < 1e-12);
        }

        let bad = FitParams { gamma: -1.0, ..sq };
        assert!(matches!(
            extrapolate_bn(&[1.0], &bad, 5),
            Err(Error::UnphysicalExtrapolation { n: 2, .. })
        ));
    }

    #[test]
    fn two_level_chain_is_cosine() {
        let times = time_grid(6.0, 30);
        let s = autocorrelation_closed(&[1.0], &times).unwrap();
        for (t, v) in times.iter().zip(&s.values) {
            assert!((v - t.cos()).abs() < 1e-9);
        }
        // zeros after the first coefficient decouple the rest of the chain
        let s = autocorrelation(&[1.0, 0.0, 0.0, 0.0], &times).unwrap();
        for (t, v) in times.iter().zip(&s.values) {
            assert!((v - t.cos()).abs() < 1e-9);
        }
    }

    #[test]
    fn all_zero_coefficients() {
        let s = autocorrelation(&[0.0; 5], &[0.0, 1.0, 10.0]).unwrap();
        assert_eq!(s.values, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn short_time_taylor() {
        let b: Vec<f64> = (1..=40).map(|n| 0.8 * n as f64 + 0.5).collect();
        let mu = moments_from_b(&b, 3).unwrap();
        let t: f64 = 0.1;
        let s = autocorrelation(&b, &[0.0, t]).unwrap();
        let taylor = 1.0 - mu[1] * t.powi(2) / 2.0 + mu[2] * t.powi(4) / 24.0 - mu[3] * t.powi(6) / 720.0;
        assert!((s.values[1] - taylor).abs() < 1e-8);
        assert_eq!(s.values[0], 1.0);
        assert!(s.norm_drift < 1e-8);
    }

    #[test]
    fn reflection_is_detected() {
        let b = vec![1.0; 5];
        assert!(matches!(
            autocorrelation(&b, &[0.0, 20.0]),
            Err(Error::BoundaryReflection { .. })
        ));
        assert!(autocorrelation_closed(&b, &[0.0, 20.0]).is_ok());
    }

    #[test]
    fn bad_grids() {
        assert!(matches!(autocorrelation(&[1.0], &[]), Err(Error::BadTimeGrid)));
        assert!(matches!(autocorrelation(&[1.0], &[0.0, 0.0]), Err(Error::BadTimeGrid)));
        assert!(matches!(autocorrelation(&[1.0], &[-1.0, 0.0]), Err(Error::BadTimeGrid)));
    }

    #[test]
    fn fit_form_text() {
        for f in [FitForm::LinearLog, FitForm::Sqrt] {
            assert_eq!(f.to_string().parse::<FitForm>().unwrap(), f);
        }
    }
}
