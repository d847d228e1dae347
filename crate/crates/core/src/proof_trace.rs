//! Numeric replay of the existence argument for Simpson's error term.
//!
//! For a concrete `f` the replay builds
//! `phi = f - q - k p - lambda x p`, where `q` interpolates `f` at the three
//! nodes, `p` is the node polynomial and `lambda = E / ∫ x p`. The constant
//! `k` is the unique solution of `∫_a^c phi = 0`:
//!
//! ```text
//! k = (∫_a^c (f - q) - lambda ∫_a^c x p) / ∫_a^c p
//! ```
//!
//! With `∫_a^b phi = 0` by the choice of `lambda`, `phi` also integrates to
//! zero over `[c, b]`, so it has a zero `u` in `(a, c)` and `v` in `(c, b)`.
//! Together with `a`, `c` and `b` that makes five zeros, and Rolle's theorem
//! applied four times gives a root `xi` of
//! `phi'''' = f'''' - 4! lambda`, i.e. `f''''(xi) = 4! E / ∫ x p`.
//!
//! Derivatives of `f` come from [`Jet4`](crate::expr::Jet4) and those of the
//! polynomial part are formal; no finite differences are taken. Runs where
//! `phi` or one of its derivatives vanishes identically are flagged and use
//! gap midpoints as witnesses, since every point qualifies there.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::certificate::xi_target;
use crate::display::general;
use crate::expr::{EvalError, Expr};
use crate::poly::{
    interpolate_quadratic_exact, moment_integral, moment_polynomial, node_polynomial, rational_from_f64,
    rational_to_f64, Interval, Polynomial, RationalPolynomial,
};
use crate::quadrature::{
    precise_reference, reference_integral, true_error, Integrand, QuadratureError, ReferenceMethod,
};
use crate::roots::{leftmost_root, Scan};

/// Tolerances and sample counts for one replay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceConfig {
    /// Samples per bracket search.
    pub samples: usize,
    /// A sampled value counts as zero below this multiple of the level's
    /// magnitude scale.
    pub zero_rel_tol: f64,
    /// Bound on the three vanishing integrals, relative to
    /// `(b - a) * scale`.
    pub vanishing_rel_tol: f64,
    /// Bound on `|f''''(xi) - target|`, relative to `1 + |target|`.
    pub final_rel_tol: f64,
}

impl Default for TraceConfig {
    fn default() -> Self {
        TraceConfig { samples: 4096, zero_rel_tol: 1e-11, vanishing_rel_tol: 1e-10, final_rel_tol: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TraceError {
    #[error("evaluating f: {0}")]
    Eval(#[from] EvalError),
    #[error("reference integral on {interval}: {source}")]
    Reference { interval: String, source: QuadratureError },
    #[error("k is ill-posed: the integral of p over [a, c] is {value:?}, below (b - a)^4 / 100")]
    IllPosed { value: f64 },
    #[error("vanishing integrals exceed {tol:?}: [a, c] {left:?}, [c, b] {right:?}, [a, b] {whole:?}")]
    Vanishing { left: f64, right: f64, whole: f64, tol: f64 },
    #[error(
        "no zero of phi in ({lo:?}, {hi:?}): sampled phi lies in [{min:?}, {max:?}] \
         (contradicts a vanishing integral; check the tolerances)"
    )]
    NoMeanValueZero { lo: f64, hi: f64, min: f64, max: f64 },
    #[error(
        "Rolle level {level}, gap {gap} ({lo:?}, {hi:?}): no root of the derivative, sampled values in \
         [{min:?}, {max:?}]; raise the sample count"
    )]
    NoRolleRoot { level: usize, gap: usize, lo: f64, hi: f64, min: f64, max: f64 },
    #[error("level {level}: sign change at x = {x:?} leaves |value| = {value:?} above {tol:?}; the derivative jumps")]
    Jump { level: usize, x: f64, value: f64, tol: f64 },
    #[error("level {level}: roots do not interlace the previous level")]
    Interlacing { level: usize },
    #[error("final identity: |f''''(xi) - target| = {residual:?} at xi = {xi:?} exceeds {tol:?}")]
    FinalIdentity { xi: f64, residual: f64, tol: f64 },
}

impl TraceError {
    /// Whether the failure is the integrand leaving its domain rather than
    /// the replay itself going wrong.
    pub fn is_domain_error(&self) -> bool {
        matches!(self, TraceError::Eval(_) | TraceError::Reference { source: QuadratureError::Eval(_), .. })
    }
}

/// The auxiliary function `phi = f - q - k p - lambda x p`.
///
/// Polynomial parts are stored in powers of `x - c`, which keeps their
/// coefficients at the scale of the interval width.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiFunction {
    pub expr: Expr,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub q: Polynomial<f64>,
    pub p: Polynomial<f64>,
    pub xp: Polynomial<f64>,
    pub k: f64,
    pub lambda: f64,
    correction: [Polynomial<f64>; 5],
    exact_correction: RationalPolynomial,
}

impl PhiFunction {
    pub fn interval(&self) -> Interval {
        Interval::new(self.a, self.b).expect("phi interval was validated")
    }

    /// `phi` and its first four derivatives at `x`.
    pub fn derivatives(&self, x: f64) -> Result<[f64; 5], EvalError> {
        let f = self.expr.eval_jet4(x)?.derivatives();
        let t = x - self.c;
        Ok(std::array::from_fn(|k| f[k] - self.correction[k].eval(&t)))
    }

    pub fn derivative(&self, x: f64, order: usize) -> Result<f64, EvalError> {
        if order == 0 {
            return self.value(x);
        }
        Ok(self.expr.eval_jet4(x)?.derivative(order) - self.correction[order].eval(&(x - self.c)))
    }

    pub fn value(&self, x: f64) -> Result<f64, EvalError> {
        Ok(self.expr.eval(x)? - self.correction[0].eval(&(x - self.c)))
    }

    /// `max |f|` over the three nodes, plus one.
    pub fn scale(&self) -> f64 {
        let f = |x: f64| self.expr.eval(x).map(f64::abs).unwrap_or(0.0);
        1.0 + f(self.a).max(f(self.c)).max(f(self.b))
    }

    /// `phi(a)`, `phi(c)`, `phi(b)`.
    pub fn node_values(&self) -> Result<[f64; 3], EvalError> {
        Ok([self.value(self.a)?, self.value(self.c)?, self.value(self.b)?])
    }
}

impl Integrand for PhiFunction {
    fn value(&self, x: f64) -> Result<f64, EvalError> {
        PhiFunction::value(self, x)
    }

    fn exact_polynomial(&self) -> Option<RationalPolynomial> {
        let f = self.expr.to_rational_polynomial()?;
        Some(&f - &self.exact_correction)
    }
}

/// Build `phi` for the single-panel error `error` of `e` on `iv`.
pub fn build_phi(e: &Expr, iv: &Interval, error: f64) -> Result<PhiFunction, TraceError> {
    let (a, b, c) = (iv.a(), iv.b(), iv.midpoint());
    let exact = iv.to_rational();
    let (a_r, m_r) = (exact.a(), exact.midpoint());
    let [fa, fc, fb] = [e.eval(a)?, e.eval(c)?, e.eval(b)?].map(rational_from_f64);
    let q = interpolate_quadratic_exact(&exact, fa, fc, fb);
    let p = node_polynomial(&exact);
    let xp = moment_polynomial(&exact);

    let int_p = rational_to_f64(&p.integrate_in_field(&a_r, &m_r));
    if int_p.abs() < iv.width().powi(4) / 100.0 {
        return Err(TraceError::IllPosed { value: int_p });
    }
    let int_q = rational_to_f64(&q.integrate_in_field(&a_r, &m_r));
    let int_xp = rational_to_f64(&xp.integrate_in_field(&a_r, &m_r));
    let left = iv.left_half();
    let int_f = precise_reference(e, &left)
        .map_err(|source| TraceError::Reference { interval: left.to_string(), source })?
        .value;

    let lambda = error / moment_integral(iv);
    let k = ((int_f - int_q) - lambda * int_xp) / int_p;

    let exact_correction = &(&q + &p.scale(&rational_from_f64(k))) + &xp.scale(&rational_from_f64(lambda));
    let shift = rational_from_f64(c);
    let centered = exact_correction.translate(&shift).to_f64();
    let correction = std::array::from_fn(|order| centered.derivative(order));
    Ok(PhiFunction {
        expr: e.clone(),
        a,
        b,
        c,
        q: q.translate(&shift).to_f64(),
        p: p.translate(&shift).to_f64(),
        xp: xp.translate(&shift).to_f64(),
        k,
        lambda,
        correction,
        exact_correction,
    })
}

/// `∫ phi` over `[a, c]`, `[c, b]` and `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vanishing {
    pub left: f64,
    pub right: f64,
    pub whole: f64,
}

impl Vanishing {
    pub fn max_abs(&self) -> f64 {
        self.left.abs().max(self.right.abs()).max(self.whole.abs())
    }
}

pub fn verify_vanishing(phi: &PhiFunction) -> Result<Vanishing, TraceError> {
    let iv = phi.interval();
    // phi is a small difference of O(scale) terms; ask for what that allows.
    let acc = 64.0 * f64::EPSILON * phi.scale() * iv.width();
    let integral = |part: Interval| {
        reference_integral(phi, &part, acc)
            .map(|r| r.value)
            .map_err(|source| TraceError::Reference { interval: part.to_string(), source })
    };
    Ok(Vanishing { left: integral(iv.left_half())?, right: integral(iv.right_half())?, whole: integral(iv)? })
}

/// Zeros of `phi` inside `(a, c)` and `(c, b)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanValueZeros {
    pub u: f64,
    pub v: f64,
    /// `phi` vanished at every sample of at least one half, whose midpoint
    /// was then taken.
    pub degenerate: bool,
}

pub fn find_mean_value_zeros(phi: &PhiFunction, cfg: &TraceConfig) -> Result<MeanValueZeros, TraceError> {
    let tol = cfg.zero_rel_tol * phi.scale();
    let mut degenerate = false;
    let mut zero_in = |lo: f64, hi: f64| -> Result<f64, TraceError> {
        match leftmost_root(|x| phi.value(x), lo, hi, cfg.samples, tol)? {
            Scan::Root { x, value } if value.abs() <= tol => Ok(x),
            Scan::Root { x, value } => Err(TraceError::Jump { level: 0, x, value: value.abs(), tol }),
            Scan::Flat => {
                degenerate = true;
                Ok(lo + (hi - lo) / 2.0)
            }
            Scan::NoBracket { min, max } => Err(TraceError::NoMeanValueZero { lo, hi, min, max }),
        }
    };
    let u = zero_in(phi.a, phi.c)?;
    let v = zero_in(phi.c, phi.b)?;
    Ok(MeanValueZeros { u, v, degenerate })
}

/// Roots of `phi^(order)` found between consecutive roots of the level above.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RolleLevel {
    pub order: usize,
    pub roots: Vec<f64>,
    /// `phi^(order)` at each root.
    pub values: Vec<f64>,
    /// Some gap had the derivative vanish at every sample; its midpoint was
    /// taken.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cascade {
    pub levels: Vec<RolleLevel>,
    pub xi: f64,
    /// `|f''''(xi) - 4! E / ∫ x p|`.
    pub final_residual: f64,
}

/// Magnitude of the terms that cancel in `phi^(order)`, used to scale the
/// zero tolerance. Floored by the node scale over `width^order` so that an
/// exactly vanishing derivative still gets a positive tolerance.
fn level_scale(phi: &PhiFunction, order: usize) -> Result<f64, EvalError> {
    let iv = phi.interval();
    let mut scale = phi.scale() / iv.width().powi(order as i32);
    for i in 0..64 {
        let x = iv.a() + (i as f64 + 0.5) * iv.width() / 64.0;
        let f = phi.expr.eval_jet4(x)?.derivative(order);
        scale = scale.max(f.abs() + phi.correction[order].eval(&(x - phi.c)).abs());
    }
    Ok(scale)
}

/// Descend from the five zeros `a < u < c < v < b` to one root of
/// `phi''''`, one root per gap at each level.
pub fn rolle_cascade(phi: &PhiFunction, zeros: [f64; 5], error: f64, cfg: &TraceConfig) -> Result<Cascade, TraceError> {
    let mut previous = zeros.to_vec();
    let mut levels = Vec::with_capacity(4);
    for order in 1..=4 {
        let tol = cfg.zero_rel_tol * level_scale(phi, order)?;
        let mut level = RolleLevel { order, roots: Vec::new(), values: Vec::new(), degenerate: false };
        for (gap, w) in previous.windows(2).enumerate() {
            let (lo, hi) = (w[0], w[1]);
            let g = |x| phi.derivative(x, order);
            let (x, value) = match leftmost_root(g, lo, hi, cfg.samples, tol)? {
                Scan::Root { x, value } if value.abs() <= tol => (x, value),
                Scan::Root { x, value } => return Err(TraceError::Jump { level: order, x, value: value.abs(), tol }),
                Scan::Flat => {
                    level.degenerate = true;
                    let mid = lo + (hi - lo) / 2.0;
                    (mid, phi.derivative(mid, order)?)
                }
                Scan::NoBracket { min, max } => {
                    return Err(TraceError::NoRolleRoot { level: order, gap: gap + 1, lo, hi, min, max })
                }
            };
            level.roots.push(x);
            level.values.push(value);
        }
        let interlaced = level.roots.iter().zip(previous.windows(2)).all(|(&r, w)| w[0] < r && r < w[1]);
        if !interlaced {
            return Err(TraceError::Interlacing { level: order });
        }
        previous = level.roots.clone();
        levels.push(level);
    }
    let xi = previous[0];
    let target = xi_target(error, &phi.interval());
    let final_residual = (phi.expr.eval_jet4(xi)?.derivative(4) - target).abs();
    let tol = cfg.final_rel_tol * (1.0 + target.abs());
    if final_residual > tol {
        return Err(TraceError::FinalIdentity { xi, residual: final_residual, tol });
    }
    Ok(Cascade { levels, xi, final_residual })
}

/// Every witness of one replay, in the order the argument uses them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProofTrace {
    pub expression: String,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// Single-panel Simpson value.
    pub approx: f64,
    pub reference: f64,
    pub reference_method: ReferenceMethod,
    #[serde(rename = "E")]
    pub error: f64,
    pub lambda: f64,
    pub k: f64,
    /// `phi` at `a`, `u`, `c`, `v`, `b`.
    pub zero_values: [f64; 5],
    pub vanishing: Vanishing,
    pub u: f64,
    pub v: f64,
    /// `phi` vanished at every sample, so `u` and `v` are conventional.
    pub phi_identically_zero: bool,
    pub zeros_degenerate: bool,
    pub rolle_levels: Vec<RolleLevel>,
    pub xi: f64,
    /// `4! E / ∫ x p`.
    pub target: f64,
    pub final_residual: f64,
}

/// The full replay: reference integral and true error, `phi`, the vanishing
/// integrals, `u` and `v`, and the Rolle cascade.
pub fn trace(e: &Expr, iv: &Interval, cfg: &TraceConfig) -> Result<ProofTrace, TraceError> {
    let reference =
        precise_reference(e, iv).map_err(|source| TraceError::Reference { interval: iv.to_string(), source })?;
    let simpson = true_error(e, iv, 1, &reference)
        .map_err(|source| TraceError::Reference { interval: iv.to_string(), source })?;
    let phi = build_phi(e, iv, simpson.error)?;
    let vanishing = verify_vanishing(&phi)?;
    let tol = cfg.vanishing_rel_tol * iv.width() * phi.scale();
    if vanishing.max_abs() > tol {
        return Err(TraceError::Vanishing {
            left: vanishing.left,
            right: vanishing.right,
            whole: vanishing.whole,
            tol,
        });
    }
    let zeros = find_mean_value_zeros(&phi, cfg)?;
    let cascade = rolle_cascade(&phi, [phi.a, zeros.u, phi.c, zeros.v, phi.b], simpson.error, cfg)?;
    let phi_identically_zero = zeros.degenerate && cascade.levels.iter().all(|l| l.degenerate);
    let mut zero_values = [0.0; 5];
    for (slot, x) in zero_values.iter_mut().zip([phi.a, zeros.u, phi.c, zeros.v, phi.b]) {
        *slot = phi.value(x)?;
    }
    Ok(ProofTrace {
        expression: e.to_string(),
        a: phi.a,
        b: phi.b,
        c: phi.c,
        approx: simpson.approx,
        reference: reference.value,
        reference_method: reference.method,
        error: simpson.error,
        lambda: phi.lambda,
        k: phi.k,
        zero_values,
        vanishing,
        u: zeros.u,
        v: zeros.v,
        phi_identically_zero,
        zeros_degenerate: zeros.degenerate,
        rolle_levels: cascade.levels,
        xi: cascade.xi,
        target: xi_target(simpson.error, iv),
        final_residual: cascade.final_residual,
    })
}

const PRIMES: [&str; 5] = ["", "'", "''", "'''", "''''"];

impl ProofTrace {
    /// Step-by-step text with six significant digits.
    pub fn render(&self) -> String {
        let g = |x: f64| general(x, 6);
        let list = |xs: &[f64]| xs.iter().map(|&x| g(x)).collect::<Vec<_>>().join(", ");
        let mut out = Vec::new();
        out.push(format!("f(x) = {} on [{}, {}], c = {}", self.expression, g(self.a), g(self.b), g(self.c)));
        out.push(format!(
            "Simpson value {}, reference {} ({}), E = {}",
            g(self.approx),
            g(self.reference),
            self.reference_method,
            g(self.error)
        ));
        out.push("1. q interpolates f at a, c, b and p(x) = (x - a)(x - c)(x - b).".into());
        out.push(format!("2. lambda = E / integral of x p over [a, b] = {}", g(self.lambda)));
        out.push(format!(
            "3. phi = f - q - k p - lambda x p with k = {} chosen so that phi integrates to 0 over [a, c]",
            g(self.k)
        ));
        let [fa, _, fc, _, fb] = self.zero_values;
        out.push(format!("   phi(a), phi(c), phi(b) = {}", list(&[fa, fc, fb])));
        out.push(format!(
            "4. integrals of phi: [a, c] {}, [c, b] {}, [a, b] {}",
            g(self.vanishing.left),
            g(self.vanishing.right),
            g(self.vanishing.whole)
        ));
        if self.phi_identically_zero {
            out.push("   phi is identically zero within tolerance, so every point is a zero.".into());
        }
        let note = if self.zeros_degenerate { " (midpoints by convention)" } else { "" };
        out.push(format!(
            "5. phi(u) = phi(v) = 0 with u = {} in (a, c) and v = {} in (c, b){note}",
            g(self.u),
            g(self.v)
        ));
        out.push(format!("   five zeros: {}", list(&[self.a, self.u, self.c, self.v, self.b])));
        out.push(format!("   phi there: {}", list(&self.zero_values)));
        out.push("6. Rolle's theorem, level by level:".into());
        for level in &self.rolle_levels {
            let note = if level.degenerate { " (identically zero; gap midpoints by convention)" } else { "" };
            out.push(format!("   phi{} = 0 at {}{note}", PRIMES[level.order], list(&level.roots)));
        }
        out.push(format!(
            "7. xi = {}: f''''(xi) = 4! E / integral of x p = {}, residual {}",
            g(self.xi),
            g(self.target),
            g(self.final_residual)
        ));
        out.join("\n") + "\n"
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certificate::{certify_single, DEFAULT_REL_TOL};
    use crate::expr::parse;
    use proptest::prelude::*;

    fn unit() -> Interval {
        Interval::new(0.0, 1.0).unwrap()
    }

    fn phi_for(text: &str, iv: &Interval) -> PhiFunction {
        let e = parse(text).unwrap();
        let reference = precise_reference(&e, iv).unwrap();
        let error = true_error(&e, iv, 1, &reference).unwrap().error;
        build_phi(&e, iv, error).unwrap()
    }

    fn run(text: &str, a: f64, b: f64) -> ProofTrace {
        trace(&parse(text).unwrap(), &Interval::new(a, b).unwrap(), &TraceConfig::default()).unwrap()
    }

    #[test]
    fn quartic_constants() {
        let phi = phi_for("x^4", &unit());
        assert!((phi.k - 1.5).abs() <= 1e-12, "{}", phi.k);
        assert!((phi.lambda - 1.0).abs() <= 1e-12, "{}", phi.lambda);
    }

    #[test]
    fn cubic_phi_vanishes() {
        let phi = phi_for("x^3", &unit());
        assert_eq!(phi.lambda, 0.0);
        assert!((phi.k - 1.0).abs() <= 1e-12);
        for i in 0..=1000 {
            assert!(phi.value(i as f64 / 1000.0).unwrap().abs() <= 1e-11);
        }
    }

    #[test]
    fn left_node_integral_is_well_posed() {
        let exact = unit().to_rational();
        let int_p = node_polynomial(&exact).integrate_in_field(&exact.a(), &exact.midpoint());
        assert_eq!(rational_to_f64(&int_p), 1.0 / 64.0);
    }

    #[test]
    fn phi_vanishes_at_the_nodes() {
        let pi = std::f64::consts::PI;
        for (text, a, b) in [("exp(x)", 0.0, 1.0), ("sin(x)", 0.0, pi), ("1/(1+x^2)", -1.0, 2.0), ("x^5", 3.0, 4.0)] {
            let phi = phi_for(text, &Interval::new(a, b).unwrap());
            for v in phi.node_values().unwrap() {
                assert!(v.abs() <= 1e-11 * phi.scale(), "{text}: {v}");
            }
        }
    }

    #[test]
    fn vanishing_examples() {
        let v = verify_vanishing(&phi_for("x^4", &unit())).unwrap();
        assert!(v.max_abs() <= 1e-12, "{v:?}");
        let v = verify_vanishing(&phi_for("x^3", &unit())).unwrap();
        assert!(v.max_abs() <= 1e-15, "{v:?}");
        let v = verify_vanishing(&phi_for("exp(x)", &unit())).unwrap();
        assert!(v.max_abs() <= 1e-10, "{v:?}");
    }

    #[test]
    fn mean_value_zero_examples() {
        let cfg = TraceConfig::default();
        let phi = phi_for("x^4", &unit());
        let z = find_mean_value_zeros(&phi, &cfg).unwrap();
        assert!(0.0 < z.u && z.u < 0.5 && 0.5 < z.v && z.v < 1.0);
        assert!(phi.value(z.u).unwrap().abs() <= 1e-11 && phi.value(z.v).unwrap().abs() <= 1e-11);

        let z = find_mean_value_zeros(&phi_for("x^3", &unit()), &cfg).unwrap();
        assert!(z.degenerate);
        assert_eq!((z.u, z.v), (0.25, 0.75));

        // cos is even about 0, and so is phi.
        let z = find_mean_value_zeros(&phi_for("cos(x)", &Interval::new(-1.0, 1.0).unwrap()), &cfg).unwrap();
        assert!(!z.degenerate);
        assert!((z.v + z.u).abs() <= 1e-9, "u = {}, v = {}", z.u, z.v);
    }

    #[test]
    fn quartic_cascade_is_degenerate() {
        let t = run("x^4", 0.0, 1.0);
        assert!(t.phi_identically_zero);
        assert!(t.rolle_levels[3].degenerate);
        assert_eq!(t.xi, 0.5);
        assert!(t.final_residual <= 1e-10);
    }

    #[test]
    fn quintic_cascade_lands_on_the_midpoint() {
        let t = run("x^5", 0.0, 1.0);
        assert!(!t.phi_identically_zero);
        assert!((t.xi - 0.5).abs() <= 1e-8, "{}", t.xi);
        assert!((120.0 * t.xi - 60.0).abs() <= 1e-6);
    }

    #[test]
    fn full_cascades_interlace() {
        let pi = std::f64::consts::PI;
        for (text, a, b) in [("exp(x)", 0.0, 1.0), ("sin(x)", 0.0, pi), ("1/(1+x^2)", 0.0, 1.0)] {
            let t = run(text, a, b);
            let counts: Vec<usize> = t.rolle_levels.iter().map(|l| l.roots.len()).collect();
            assert_eq!(counts, [4, 3, 2, 1], "{text}");
            assert!(t.rolle_levels.iter().all(|l| !l.degenerate), "{text}");
            let mut previous = vec![t.a, t.u, t.c, t.v, t.b];
            for level in &t.rolle_levels {
                for (r, w) in level.roots.iter().zip(previous.windows(2)) {
                    assert!(w[0] < *r && *r < w[1], "{text} level {}", level.order);
                }
                previous = level.roots.clone();
            }
            assert!(t.final_residual <= 1e-8 * (1.0 + t.target.abs()), "{text}");
        }
    }

    #[test]
    fn rendering_names_each_step() {
        let text = run("x^4", 0.0, 1.0).render();
        assert!(text.contains("k = 1.5 "), "{text}");
        assert!(text.contains("phi'''' = 0 at 0.5 (identically zero"), "{text}");
        let text = run("x^3", 0.0, 1.0).render();
        assert!(text.contains("phi is identically zero"), "{text}");
        let text = run("exp(x)", 0.0, 1.0).render();
        assert_eq!(text.lines().filter(|l| l.trim_start().starts_with("phi'")).count(), 4, "{text}");
    }

    #[test]
    fn domain_failures_are_told_apart() {
        let err = trace(&parse("log(x)").unwrap(), &unit(), &TraceConfig::default()).unwrap_err();
        assert!(err.is_domain_error(), "{err}");
        assert!(!TraceError::Interlacing { level: 2 }.is_domain_error());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn trace_and_certificate_agree(which in 0usize..4, a in -2.0f64..2.0, w in 0.3f64..2.0) {
            let text = ["x^5", "sin(x)", "exp(x)", "1/(1+x^2)"][which];
            let iv = Interval::new(a, a + w).unwrap();
            let e = parse(text).unwrap();
            let t = trace(&e, &iv, &TraceConfig::default()).unwrap();
            let cert = certify_single(&e, &iv, DEFAULT_REL_TOL).unwrap();
            let f4 = e.eval_jet4(t.xi).unwrap().derivative(4);
            prop_assert!((f4 - cert.target).abs() <= 1e-8 * (1.0 + cert.target.abs()));
        }

        #[test]
        fn cubics_give_identically_zero_phi(
            coeffs in proptest::collection::vec(-3.0f64..3.0, 4), a in -2.0f64..2.0, w in 0.2f64..3.0,
        ) {
            let text = format!("({}) + ({})*x + ({})*x^2 + ({})*x^3", coeffs[0], coeffs[1], coeffs[2], coeffs[3]);
            let iv = Interval::new(a, a + w).unwrap();
            let phi = phi_for(&text, &iv);
            for i in 0..=1000 {
                let x = a + w * i as f64 / 1000.0;
                prop_assert!(phi.value(x).unwrap().abs() <= 1e-11 * phi.scale());
            }
        }
    }
}
