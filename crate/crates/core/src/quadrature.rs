//! Simpson's rule: single panel, composite and adaptive forms, the true
//! error against a reference integral, and the a-priori fourth-derivative
//! bound.
//!
//! Panel counts always count Simpson panels. One panel spans `[a, b]` and
//! samples `a`, the midpoint and `b`, so `n` panels use `2n` subintervals of
//! width `(b - a) / (2n)` and `2n + 1` function evaluations.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{DomainKind, EvalError, Expr};
use crate::poly::{rational_from_f64, rational_to_f64, Interval, Polynomial, RationalPolynomial};

/// Something that can be sampled on the real line.
pub trait Integrand {
    fn value(&self, x: f64) -> Result<f64, EvalError>;

    /// Exact rational form, when the integrand is a polynomial.
    fn exact_polynomial(&self) -> Option<RationalPolynomial> {
        None
    }
}

impl Integrand for Expr {
    fn value(&self, x: f64) -> Result<f64, EvalError> {
        self.eval(x)
    }

    fn exact_polynomial(&self) -> Option<RationalPolynomial> {
        self.to_rational_polynomial()
    }
}

impl Integrand for Polynomial<f64> {
    fn value(&self, x: f64) -> Result<f64, EvalError> {
        Ok(self.eval(&x))
    }

    fn exact_polynomial(&self) -> Option<RationalPolynomial> {
        Some(self.to_rational())
    }
}

impl<F: Fn(f64) -> f64> Integrand for F {
    fn value(&self, x: f64) -> Result<f64, EvalError> {
        let v = self(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError { kind: DomainKind::NonFinite, subexpr: "<closure>".into(), x })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadratureError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("panel count must be at least 1")]
    ZeroPanels,
    #[error("tolerance must be positive and finite (got {0:?})")]
    BadTolerance(f64),
    #[error(
        "extrapolated Simpson did not reach accuracy {target:e} within {panels} panels \
         (last change {last_change:e})"
    )]
    NoConvergence { target: f64, panels: usize, last_change: f64 },
    #[error("adaptive Simpson exceeded depth {max_depth} on [{lo:?}, {hi:?}]")]
    DepthExceeded { lo: f64, hi: f64, max_depth: u32 },
}

/// Neumaier's compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::new();
        iter.into_iter().for_each(|x| s.add(x));
        s
    }
}

fn panel_value(lo: f64, hi: f64, f_lo: f64, f_mid: f64, f_hi: f64) -> f64 {
    (hi - lo) / 6.0 * (f_lo + 4.0 * f_mid + f_hi)
}

/// `(b - a) / 6 * (f(a) + 4 f(c) + f(b))`.
pub fn simpson_single<F: Integrand + ?Sized>(f: &F, iv: &Interval) -> Result<f64, QuadratureError> {
    let fa = f.value(iv.a())?;
    let fc = f.value(iv.midpoint())?;
    let fb = f.value(iv.b())?;
    Ok(panel_value(iv.a(), iv.b(), fa, fc, fb))
}

/// Composite Simpson over `panels` equal panels. Shared panel edges are
/// evaluated once; one panel reproduces [`simpson_single`] bit for bit.
pub fn simpson_composite<F: Integrand + ?Sized>(f: &F, iv: &Interval, panels: usize) -> Result<f64, QuadratureError> {
    if panels == 0 {
        return Err(QuadratureError::ZeroPanels);
    }
    let edges = iv.panel_edges(panels);
    let edge_values = edges.iter().map(|&x| f.value(x)).collect::<Result<Vec<_>, _>>()?;
    let mut total = CompensatedSum::new();
    for (i, w) in edges.windows(2).enumerate() {
        let mid = (w[0] + w[1]) / 2.0;
        total.add(panel_value(w[0], w[1], edge_values[i], f.value(mid)?, edge_values[i + 1]));
    }
    Ok(total.total())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReferenceMethod {
    ExactPolynomial,
    Extrapolated,
    UserSupplied,
}

impl std::fmt::Display for ReferenceMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ReferenceMethod::ExactPolynomial => "exact-polynomial",
            ReferenceMethod::Extrapolated => "extrapolated",
            ReferenceMethod::UserSupplied => "user-supplied",
        })
    }
}

/// A high-accuracy value of `∫ f` together with how it was obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceIntegral {
    pub value: f64,
    pub method: ReferenceMethod,
    pub est_accuracy: f64,
}

impl ReferenceIntegral {
    pub fn user_supplied(value: f64, est_accuracy: f64) -> Self {
        ReferenceIntegral { value, method: ReferenceMethod::UserSupplied, est_accuracy }
    }
}

/// Panel budget for [`richardson_integral`].
pub const DEFAULT_PANEL_BUDGET: usize = 1 << 20;

/// Extrapolation columns kept; deeper columns add rounding, not accuracy.
const MAX_COLUMNS: usize = 8;

/// Rows computed before the stopping test is trusted.
const MIN_ROWS: usize = 4;

/// Reference integral: exact for polynomials, extrapolated Simpson otherwise.
pub fn reference_integral<F: Integrand + ?Sized>(
    f: &F,
    iv: &Interval,
    target_acc: f64,
) -> Result<ReferenceIntegral, QuadratureError> {
    if !(target_acc > 0.0 && target_acc.is_finite()) {
        return Err(QuadratureError::BadTolerance(target_acc));
    }
    match f.exact_polynomial() {
        Some(poly) => Ok(exact_polynomial_integral(&poly, iv)),
        None => richardson_integral(f, iv, target_acc, DEFAULT_PANEL_BUDGET),
    }
}

/// Reference integral driven down to the rounding floor of the sums: the
/// requested accuracy is one unit of the single-panel Simpson value, and
/// [`richardson_integral`] never asks for less than its noise floor.
pub fn precise_reference<F: Integrand + ?Sized>(f: &F, iv: &Interval) -> Result<ReferenceIntegral, QuadratureError> {
    let rough = simpson_single(f, iv)?;
    reference_integral(f, iv, (f64::EPSILON * rough.abs()).max(f64::MIN_POSITIVE))
}

/// Integral of a rational polynomial, computed exactly and rounded once.
pub fn exact_polynomial_integral(poly: &RationalPolynomial, iv: &Interval) -> ReferenceIntegral {
    let exact = poly.integrate_in_field(&rational_from_f64(iv.a()), &rational_from_f64(iv.b()));
    let value = rational_to_f64(&exact);
    ReferenceIntegral { value, method: ReferenceMethod::ExactPolynomial, est_accuracy: 0.5 * ulp(value) }
}

fn ulp(x: f64) -> f64 {
    let x = x.abs();
    if x == 0.0 {
        return f64::from_bits(1);
    }
    f64::from_bits(x.to_bits() + 1) - x
}

/// Simpson with successive panel doubling and a Richardson table on the
/// even error expansion `h^4, h^6, ...`. Stops when two successive
/// diagonal extrapolants agree to `target_acc`, or to the rounding floor of
/// the sums, whichever is larger.
pub fn richardson_integral<F: Integrand + ?Sized>(
    f: &F,
    iv: &Interval,
    target_acc: f64,
    panel_budget: usize,
) -> Result<ReferenceIntegral, QuadratureError> {
    if !(target_acc > 0.0 && target_acc.is_finite()) {
        return Err(QuadratureError::BadTolerance(target_acc));
    }
    let (a, b) = (iv.a(), iv.b());
    let h = b - a;
    let (fa, fb) = (f.value(a)?, f.value(b)?);

    // Trapezoid sums over 2^j subintervals; interior nodes are shared between levels.
    let mut interior = CompensatedSum::new();
    let mut interior_abs = CompensatedSum::new();
    let mut subintervals = 1usize;
    let mut trapezoid_prev = h * 0.5 * (fa + fb);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut last_change = f64::INFINITY;

    loop {
        let panels = subintervals;
        if panels > panel_budget {
            return Err(QuadratureError::NoConvergence { target: target_acc, panels: panels / 2, last_change });
        }
        subintervals *= 2;
        let step = h / subintervals as f64;
        for i in 0..subintervals / 2 {
            let v = f.value(a + (2 * i + 1) as f64 * step)?;
            interior.add(v);
            interior_abs.add(v.abs());
        }
        let trapezoid = step * (0.5 * (fa + fb) + interior.total());
        let simpson = (4.0 * trapezoid - trapezoid_prev) / 3.0;
        trapezoid_prev = trapezoid;

        let mut row = vec![simpson];
        if let Some(prev) = rows.last() {
            for k in 1..=prev.len().min(MAX_COLUMNS) {
                let factor = 4f64.powi(k as i32 + 1) - 1.0;
                let refined = row[k - 1] + (row[k - 1] - prev[k - 1]) / factor;
                row.push(refined);
            }
        }
        let best = *row.last().expect("row has an entry");
        if let Some(prev) = rows.last() {
            last_change = (best - prev.last().expect("row has an entry")).abs();
            let abs_integral = step * (0.5 * (fa.abs() + fb.abs()) + interior_abs.total());
            let floor = 32.0 * f64::EPSILON * abs_integral;
            if rows.len() + 1 >= MIN_ROWS && last_change <= target_acc.max(floor) {
                return Ok(ReferenceIntegral {
                    value: best,
                    method: ReferenceMethod::Extrapolated,
                    est_accuracy: last_change,
                });
            }
        }
        rows.push(row);
    }
}

/// Outcome of one Simpson computation checked against a reference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimpsonResult {
    pub approx: f64,
    pub reference: f64,
    /// `reference - approx`.
    pub error: f64,
    pub panels: usize,
    pub a_priori_bound: Option<f64>,
}

impl SimpsonResult {
    /// Attach `|E| <= m4 (b - a)^5 / (2880 n^4)`.
    pub fn with_bound(mut self, m4: f64, iv: &Interval) -> Self {
        self.a_priori_bound = Some(a_priori_bound(m4, iv, self.panels));
        self
    }
}

/// Composite Simpson value and its true error `E = reference - approx`.
pub fn true_error<F: Integrand + ?Sized>(
    f: &F,
    iv: &Interval,
    panels: usize,
    reference: &ReferenceIntegral,
) -> Result<SimpsonResult, QuadratureError> {
    let approx = simpson_composite(f, iv, panels)?;
    Ok(SimpsonResult {
        approx,
        reference: reference.value,
        error: reference.value - approx,
        panels,
        a_priori_bound: None,
    })
}

/// `m4 (b - a)^5 / (2880 n^4)`, valid whenever `m4 >= sup |f''''|`.
pub fn a_priori_bound(m4: f64, iv: &Interval, panels: usize) -> f64 {
    let n = panels as f64;
    m4 * iv.width().powi(5) / (2880.0 * n.powi(4))
}

pub const DEFAULT_MAX_DEPTH: u32 = 50;

/// Adaptive Simpson with the classic `(S_fine - S_coarse) / 15` acceptance
/// test and tolerance halving at each bisection.
///
/// In the result, `approx` sums the fine Simpson values over the accepted
/// mesh, `reference` adds each leaf's `/15` correction, `error` is their
/// difference (a heuristic estimate, not a true error) and `panels` counts
/// the Simpson panels of the final mesh, two per accepted leaf.
pub fn adaptive_simpson<F: Integrand + ?Sized>(
    f: &F,
    iv: &Interval,
    tol: f64,
) -> Result<SimpsonResult, QuadratureError> {
    adaptive_simpson_with_depth(f, iv, tol, DEFAULT_MAX_DEPTH)
}

pub fn adaptive_simpson_with_depth<F: Integrand + ?Sized>(
    f: &F,
    iv: &Interval,
    tol: f64,
    max_depth: u32,
) -> Result<SimpsonResult, QuadratureError> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(QuadratureError::BadTolerance(tol));
    }
    let (a, b) = (iv.a(), iv.b());
    let m = iv.midpoint();
    let (fa, fm, fb) = (f.value(a)?, f.value(m)?, f.value(b)?);
    let mut acc = AdaptiveAccumulator::default();
    let whole = panel_value(a, b, fa, fm, fb);
    adaptive_step(f, [a, m, b], [fa, fm, fb], whole, tol, 0, max_depth, &mut acc)?;
    let approx = acc.fine.total();
    let reference = acc.corrected.total();
    Ok(SimpsonResult { approx, reference, error: reference - approx, panels: 2 * acc.leaves, a_priori_bound: None })
}

#[derive(Default)]
struct AdaptiveAccumulator {
    fine: CompensatedSum,
    corrected: CompensatedSum,
    leaves: usize,
}

#[allow(clippy::too_many_arguments)]
fn adaptive_step<F: Integrand + ?Sized>(
    f: &F,
    [a, m, b]: [f64; 3],
    [fa, fm, fb]: [f64; 3],
    whole: f64,
    tol: f64,
    depth: u32,
    max_depth: u32,
    acc: &mut AdaptiveAccumulator,
) -> Result<(), QuadratureError> {
    let (lm, rm) = ((a + m) / 2.0, (m + b) / 2.0);
    let (flm, frm) = (f.value(lm)?, f.value(rm)?);
    let left = panel_value(a, m, fa, flm, fm);
    let right = panel_value(m, b, fm, frm, fb);
    let fine = left + right;
    let delta = fine - whole;
    if delta.abs() <= 15.0 * tol {
        acc.fine.add(fine);
        acc.corrected.add(fine + delta / 15.0);
        acc.leaves += 1;
        return Ok(());
    }
    if depth >= max_depth || !(a < lm && lm < m && m < rm && rm < b) {
        return Err(QuadratureError::DepthExceeded { lo: a, hi: b, max_depth });
    }
    adaptive_step(f, [a, lm, m], [fa, flm, fm], left, tol / 2.0, depth + 1, max_depth, acc)?;
    adaptive_step(f, [m, rm, b], [fm, frm, fb], right, tol / 2.0, depth + 1, max_depth, acc)
}

/// One row of a panel-doubling convergence study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub panels: usize,
    pub approx: f64,
    pub abs_error: f64,
    /// `log2(|E(n/2)| / |E(n)|)`; absent on the first row and when either
    /// error is zero.
    pub observed_order: Option<f64>,
}

/// Composite Simpson at `n = 1, 2, 4, ..., 2^levels` against one reference.
pub fn convergence_sweep<F: Integrand + ?Sized>(
    f: &F,
    iv: &Interval,
    levels: u32,
    reference: &ReferenceIntegral,
) -> Result<Vec<SweepRow>, QuadratureError> {
    let mut rows: Vec<SweepRow> = Vec::with_capacity(levels as usize + 1);
    for level in 0..=levels {
        let panels = 1usize << level;
        let approx = simpson_composite(f, iv, panels)?;
        let abs_error = (reference.value - approx).abs();
        let observed_order = rows.last().and_then(|prev| {
            let ratio = prev.abs_error / abs_error;
            (prev.abs_error > 0.0 && abs_error > 0.0 && ratio.is_finite()).then(|| ratio.log2())
        });
        rows.push(SweepRow { panels, approx, abs_error, observed_order });
    }
    Ok(rows)
}
