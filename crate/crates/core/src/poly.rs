//! Dense univariate polynomials, the Simpson node polynomial and the
//! quadratic interpolant through the three Simpson nodes.
//!
//! Polynomials are generic over their coefficient field so the same code
//! runs on `f64` and on exact [`BigRational`]s. The rational path is what the
//! test oracles use to confirm node-polynomial identities bit for bit.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

/// Field the polynomial coefficients live in.
pub trait Coefficient:
    Clone
    + PartialEq
    + PartialOrd
    + fmt::Debug
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_int(n: i64) -> Self;

    fn is_finite_value(&self) -> bool {
        true
    }
}

impl Coefficient for f64 {
    fn from_int(n: i64) -> Self {
        n as f64
    }

    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }
}

impl Coefficient for BigRational {
    fn from_int(n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }
}

/// Exact rational value of a finite double.
pub fn rational_from_f64(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite double")
}

/// Nearest double to a rational (correctly rounded).
pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntervalError {
    #[error("interval endpoints must be finite (got [{a}, {b}])")]
    NonFinite { a: String, b: String },
    #[error("interval requires a < b (got [{a}, {b}])")]
    NotIncreasing { a: String, b: String },
    #[error("interval [{a}, {b}] is too narrow: its midpoint is not strictly interior")]
    TooNarrow { a: String, b: String },
}

/// Closed interval `[a, b]` with `a < b` and a strictly interior midpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct Interval<T = f64> {
    a: T,
    b: T,
}

impl<T: Coefficient> Interval<T> {
    pub fn new(a: T, b: T) -> Result<Self, IntervalError> {
        let show = |a: &T, b: &T| (format!("{a:?}"), format!("{b:?}"));
        if !a.is_finite_value() || !b.is_finite_value() {
            let (a, b) = show(&a, &b);
            return Err(IntervalError::NonFinite { a, b });
        }
        if a >= b {
            let (a, b) = show(&a, &b);
            return Err(IntervalError::NotIncreasing { a, b });
        }
        let iv = Interval { a, b };
        let c = iv.midpoint();
        if !(iv.a < c && c < iv.b) {
            let (a, b) = show(&iv.a, &iv.b);
            return Err(IntervalError::TooNarrow { a, b });
        }
        Ok(iv)
    }

    pub fn a(&self) -> T {
        self.a.clone()
    }

    pub fn b(&self) -> T {
        self.b.clone()
    }

    /// The midpoint `c = (a + b) / 2`.
    pub fn midpoint(&self) -> T {
        (self.a.clone() + self.b.clone()) / T::from_int(2)
    }

    pub fn width(&self) -> T {
        self.b.clone() - self.a.clone()
    }

    /// Left half `[a, c]`.
    pub fn left_half(&self) -> Interval<T> {
        Interval { a: self.a(), b: self.midpoint() }
    }

    /// Right half `[c, b]`.
    pub fn right_half(&self) -> Interval<T> {
        Interval { a: self.midpoint(), b: self.b() }
    }
}

impl Interval<f64> {
    /// Exact rational image of this interval.
    pub fn to_rational(&self) -> Interval<BigRational> {
        Interval { a: rational_from_f64(self.a), b: rational_from_f64(self.b) }
    }

    /// `true` when `x` lies strictly between the endpoints.
    pub fn contains_strictly(&self, x: f64) -> bool {
        self.a < x && x < self.b
    }

    /// Endpoints of the `panels` equal sub-intervals. The first entry is
    /// exactly `a` and the last exactly `b`.
    pub fn panel_edges(&self, panels: usize) -> Vec<f64> {
        let n = panels as f64;
        let mut edges: Vec<f64> = (0..panels).map(|i| self.a + (i as f64) * (self.b - self.a) / n).collect();
        edges.push(self.b);
        edges
    }
}

impl<T: fmt::Display> fmt::Display for Interval<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.a, self.b)
    }
}

/// Dense polynomial; `coeffs[i]` multiplies `x^i`.
///
/// Normalized form has a nonzero leading coefficient. The zero polynomial
/// is stored as the single coefficient `0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial<T = f64> {
    coeffs: Vec<T>,
}

pub type RationalPolynomial = Polynomial<BigRational>;

impl<T: Coefficient> Polynomial<T> {
    pub fn new(mut coeffs: Vec<T>) -> Self {
        while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(T::zero());
        }
        Polynomial { coeffs }
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: vec![T::zero()] }
    }

    pub fn constant(c: T) -> Self {
        Self::new(vec![c])
    }

    /// The monomial `x`.
    pub fn x() -> Self {
        Self::new(vec![T::zero(), T::one()])
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_zero()
    }

    /// Degree, with the zero polynomial reported as degree 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading_coefficient(&self) -> T {
        self.coeffs[self.coeffs.len() - 1].clone()
    }

    /// Horner evaluation.
    pub fn eval(&self, x: &T) -> T {
        self.coeffs.iter().rev().fold(T::zero(), |acc, c| acc * x.clone() + c.clone())
    }

    pub fn scale(&self, s: &T) -> Self {
        Self::new(self.coeffs.iter().map(|c| c.clone() * s.clone()).collect())
    }

    /// Multiplication by `x`.
    pub fn shift_up(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(T::zero());
        coeffs.extend(self.coeffs.iter().cloned());
        Self::new(coeffs)
    }

    pub fn pow(&self, exp: u32) -> Self {
        (0..exp).fold(Self::constant(T::one()), |acc, _| &acc * self)
    }

    /// Formal derivative of the given order.
    pub fn derivative(&self, order: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        for _ in 0..order {
            if coeffs.len() <= 1 {
                return Self::zero();
            }
            coeffs = coeffs.iter().enumerate().skip(1).map(|(i, c)| c.clone() * T::from_int(i as i64)).collect();
        }
        Self::new(coeffs)
    }

    /// Antiderivative with zero constant term.
    pub fn antiderivative(&self) -> Self {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(T::zero());
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs.push(c.clone() / T::from_int(i as i64 + 1));
        }
        Self::new(coeffs)
    }

    /// The polynomial `t -> self(t + shift)`, i.e. coefficients in powers of
    /// `x - shift`.
    pub fn translate(&self, shift: &T) -> Self {
        let linear = Polynomial::new(vec![shift.clone(), T::one()]);
        self.coeffs.iter().rev().fold(Self::zero(), |acc, c| &(&acc * &linear) + &Self::constant(c.clone()))
    }

    /// `∫_lo^hi` evaluated through the antiderivative in the coefficient field.
    pub fn integrate_in_field(&self, lo: &T, hi: &T) -> T {
        let anti = self.antiderivative();
        anti.eval(hi) - anti.eval(lo)
    }
}

impl Polynomial<f64> {
    pub fn to_rational(&self) -> RationalPolynomial {
        Polynomial::new(self.coeffs.iter().map(|&c| rational_from_f64(c)).collect())
    }

    /// `∫_lo^hi`, exact for the stored coefficients and rounded once.
    ///
    /// Coefficients and limits are lifted to rationals so the antiderivative
    /// difference suffers no cancellation.
    pub fn integrate(&self, lo: f64, hi: f64) -> f64 {
        let exact = self.to_rational().integrate_in_field(&rational_from_f64(lo), &rational_from_f64(hi));
        rational_to_f64(&exact)
    }

    /// Value and derivatives one through four at `x`.
    pub fn derivatives_at(&self, x: f64) -> [f64; 5] {
        let mut out = [0.0; 5];
        let mut d = self.clone();
        for slot in out.iter_mut() {
            *slot = d.eval(&x);
            d = d.derivative(1);
        }
        out
    }
}

impl RationalPolynomial {
    pub fn to_f64(&self) -> Polynomial<f64> {
        Polynomial::new(self.coeffs.iter().map(rational_to_f64).collect())
    }
}

impl<T: Coefficient> Add for &Polynomial<T> {
    type Output = Polynomial<T>;

    fn add(self, rhs: Self) -> Polynomial<T> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let get = |p: &Polynomial<T>, i: usize| p.coeffs.get(i).cloned().unwrap_or_else(T::zero);
        Polynomial::new((0..n).map(|i| get(self, i) + get(rhs, i)).collect())
    }
}

impl<T: Coefficient> Sub for &Polynomial<T> {
    type Output = Polynomial<T>;

    fn sub(self, rhs: Self) -> Polynomial<T> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let get = |p: &Polynomial<T>, i: usize| p.coeffs.get(i).cloned().unwrap_or_else(T::zero);
        Polynomial::new((0..n).map(|i| get(self, i) - get(rhs, i)).collect())
    }
}

impl<T: Coefficient> Mul for &Polynomial<T> {
    type Output = Polynomial<T>;

    fn mul(self, rhs: Self) -> Polynomial<T> {
        let mut out = vec![T::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        Polynomial::new(out)
    }
}

impl<T: Coefficient> Neg for &Polynomial<T> {
    type Output = Polynomial<T>;

    fn neg(self) -> Polynomial<T> {
        Polynomial::new(self.coeffs.iter().map(|c| -c.clone()).collect())
    }
}

impl<T: Coefficient + fmt::Display> fmt::Display for Polynomial<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let negative = *c < T::zero();
            let mag = if negative { -c.clone() } else { c.clone() };
            match (first, negative) {
                (true, true) => write!(f, "-")?,
                (true, false) => {}
                (false, true) => write!(f, " - ")?,
                (false, false) => write!(f, " + ")?,
            }
            first = false;
            let unit = mag.is_one();
            match i {
                0 => write!(f, "{mag}")?,
                1 if unit => write!(f, "x")?,
                1 => write!(f, "{mag}*x")?,
                _ if unit => write!(f, "x^{i}")?,
                _ => write!(f, "{mag}*x^{i}")?,
            }
        }
        Ok(())
    }
}

/// The monic cubic `p(x) = (x - a)(x - c)(x - b)` vanishing at the three
/// Simpson nodes.
pub fn node_polynomial<T: Coefficient>(iv: &Interval<T>) -> Polynomial<T> {
    [iv.a(), iv.midpoint(), iv.b()]
        .into_iter()
        .map(|r| Polynomial::new(vec![-r, T::one()]))
        .fold(Polynomial::constant(T::one()), |acc, factor| &acc * &factor)
}

/// `x * p(x)` for the node polynomial of `iv`.
pub fn moment_polynomial<T: Coefficient>(iv: &Interval<T>) -> Polynomial<T> {
    node_polynomial(iv).shift_up()
}

/// The quadratic through `(a, fa)`, `(c, fc)`, `(b, fb)`.
///
/// Coefficients are computed exactly from the given doubles and rounded
/// once each, so equal node values give an exactly constant polynomial.
pub fn interpolate_quadratic(iv: &Interval<f64>, fa: f64, fc: f64, fb: f64) -> Polynomial<f64> {
    let [fa, fc, fb] = [fa, fc, fb].map(rational_from_f64);
    interpolate_quadratic_exact(&iv.to_rational(), fa, fc, fb).to_f64()
}

/// Quadratic interpolant in any coefficient field.
///
/// The Lagrange form is written in `t = x - c` with half-width `h`, where
/// the symmetric nodes give the closed form
/// `fc + (fb - fa) t / (2h) + (fa - 2 fc + fb) t^2 / (2h^2)`, then expanded
/// about the origin.
pub fn interpolate_quadratic_exact<T: Coefficient>(iv: &Interval<T>, fa: T, fc: T, fb: T) -> Polynomial<T> {
    let two = T::from_int(2);
    let c = iv.midpoint();
    let h = iv.width() / two.clone();
    let slope = (fb.clone() - fa.clone()) / (two.clone() * h.clone());
    let curvature = (fa - two.clone() * fc.clone() + fb) / (two.clone() * h.clone() * h);
    let linear = slope.clone() - two * curvature.clone() * c.clone();
    let constant = fc - slope * c.clone() + curvature.clone() * c.clone() * c;
    Polynomial::new(vec![constant, linear, curvature])
}

/// Definite integral of a polynomial; see [`Polynomial::integrate`].
pub fn integrate_poly(poly: &Polynomial<f64>, lo: f64, hi: f64) -> f64 {
    poly.integrate(lo, hi)
}

pub fn differentiate_poly<T: Coefficient>(poly: &Polynomial<T>, order: usize) -> Polynomial<T> {
    poly.derivative(order)
}

/// `∫_a^b x p(x) dx`, correctly rounded. Equals `-(b - a)^5 / 120`.
pub fn moment_integral(iv: &Interval<f64>) -> f64 {
    let exact = iv.to_rational();
    rational_to_f64(&moment_polynomial(&exact).integrate_in_field(&exact.a(), &exact.b()))
}
