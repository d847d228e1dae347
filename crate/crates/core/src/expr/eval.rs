use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

use super::ast::{BinOp, Expr, Func};
use super::jet::Jet4;
use crate::poly::{rational_from_f64, Coefficient, Polynomial, RationalPolynomial};

/// Why an evaluation left the function's domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainKind {
    LogOfNonPositive,
    SqrtOfNegative,
    DivisionByZero,
    NegativeBaseFractionalPower,
    /// Defined in plain arithmetic but without four derivatives here,
    /// e.g. `sqrt` at zero.
    NotDifferentiable,
    NonFinite,
}

impl fmt::Display for DomainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DomainKind::LogOfNonPositive => "log of a non-positive number",
            DomainKind::SqrtOfNegative => "sqrt of a negative number",
            DomainKind::DivisionByZero => "division by zero",
            DomainKind::NegativeBaseFractionalPower => "non-integer power of a negative base",
            DomainKind::NotDifferentiable => "not four times differentiable at this point",
            DomainKind::NonFinite => "non-finite result",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("domain error at x = {x:?}: {kind} in `{subexpr}`")]
pub struct EvalError {
    pub kind: DomainKind,
    /// The offending subexpression, pretty-printed.
    pub subexpr: String,
    pub x: f64,
}

/// Number types the evaluator runs on. Plain `f64` and [`Jet4`] share one
/// code path so their values agree bit for bit.
pub(crate) trait Scalar:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
    fn constant(c: f64) -> Self;
    fn value(&self) -> f64;
    fn is_constant(&self) -> bool;
    fn is_finite(&self) -> bool;
    fn divide(&self, rhs: &Self) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
    fn sqrt(&self) -> Result<Self, DomainKind>;
    fn powf(&self, r: f64) -> Result<Self, DomainKind>;
    fn pow(&self, exponent: &Self) -> Self;
}

impl Scalar for f64 {
    fn constant(c: f64) -> Self {
        c
    }
    fn value(&self) -> f64 {
        *self
    }
    fn is_constant(&self) -> bool {
        true
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
    fn divide(&self, rhs: &Self) -> Self {
        self / rhs
    }
    fn sin(&self) -> Self {
        f64::sin(*self)
    }
    fn cos(&self) -> Self {
        f64::cos(*self)
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn ln(&self) -> Self {
        f64::ln(*self)
    }
    fn sqrt(&self) -> Result<Self, DomainKind> {
        Ok(f64::sqrt(*self))
    }
    fn powf(&self, r: f64) -> Result<Self, DomainKind> {
        Ok(f64::powf(*self, r))
    }
    fn pow(&self, exponent: &Self) -> Self {
        f64::powf(*self, *exponent)
    }
}

impl Scalar for Jet4 {
    fn constant(c: f64) -> Self {
        Jet4::constant(c)
    }
    fn value(&self) -> f64 {
        Jet4::value(self)
    }
    fn is_constant(&self) -> bool {
        Jet4::is_constant(self)
    }
    fn is_finite(&self) -> bool {
        Jet4::is_finite(self)
    }
    fn divide(&self, rhs: &Self) -> Self {
        self.div(rhs)
    }
    fn sin(&self) -> Self {
        Jet4::sin(self)
    }
    fn cos(&self) -> Self {
        Jet4::cos(self)
    }
    fn exp(&self) -> Self {
        Jet4::exp(self)
    }
    fn ln(&self) -> Self {
        Jet4::ln(self)
    }
    fn sqrt(&self) -> Result<Self, DomainKind> {
        if self.value() == 0.0 && !self.is_constant() {
            return Err(DomainKind::NotDifferentiable);
        }
        if self.is_constant() {
            return Ok(Jet4::constant(self.value().sqrt()));
        }
        Ok(Jet4::sqrt(self))
    }
    fn powf(&self, r: f64) -> Result<Self, DomainKind> {
        if self.is_constant() {
            return Ok(Jet4::constant(self.value().powf(r)));
        }
        if self.value() == 0.0 && r.fract() != 0.0 {
            return Err(DomainKind::NotDifferentiable);
        }
        Ok(Jet4::powf(self, r))
    }
    fn pow(&self, exponent: &Self) -> Self {
        Jet4::pow(self, exponent)
    }
}

pub(crate) fn evaluate<N: Scalar>(e: &Expr, x: N) -> Result<N, EvalError> {
    let fail = |kind: DomainKind| EvalError { kind, subexpr: e.to_string(), x: x.value() };
    let out = match e {
        Expr::Number(v) => N::constant(*v),
        Expr::Const(c) => N::constant(c.value()),
        Expr::Var => x,
        Expr::Neg(inner) => -evaluate(inner, x)?,
        Expr::Call(func, arg) => {
            let u = evaluate(arg, x)?;
            match func {
                Func::Sin => u.sin(),
                Func::Cos => u.cos(),
                Func::Exp => u.exp(),
                Func::Log if u.value() <= 0.0 => return Err(fail(DomainKind::LogOfNonPositive)),
                Func::Log => u.ln(),
                Func::Sqrt if u.value() < 0.0 => return Err(fail(DomainKind::SqrtOfNegative)),
                Func::Sqrt => u.sqrt().map_err(fail)?,
            }
        }
        Expr::Binary(op, l, r) => {
            let lhs = evaluate(l, x)?;
            let rhs = evaluate(r, x)?;
            match op {
                BinOp::Add => lhs + rhs,
                BinOp::Sub => lhs - rhs,
                BinOp::Mul => lhs * rhs,
                BinOp::Div if rhs.value() == 0.0 => return Err(fail(DomainKind::DivisionByZero)),
                BinOp::Div => lhs.divide(&rhs),
                BinOp::Pow => power(lhs, rhs).map_err(fail)?,
            }
        }
    };
    if !out.is_finite() {
        return Err(fail(DomainKind::NonFinite));
    }
    Ok(out)
}

fn power<N: Scalar>(base: N, exponent: N) -> Result<N, DomainKind> {
    let b = base.value();
    let r = exponent.value();
    if exponent.is_constant() {
        let integer = r.fract() == 0.0;
        if b == 0.0 && r < 0.0 {
            return Err(DomainKind::DivisionByZero);
        }
        if b < 0.0 && !integer {
            return Err(DomainKind::NegativeBaseFractionalPower);
        }
        return base.powf(r);
    }
    if b < 0.0 {
        return Err(DomainKind::NegativeBaseFractionalPower);
    }
    if b == 0.0 {
        return Err(DomainKind::NotDifferentiable);
    }
    Ok(base.pow(&exponent))
}

/// Largest exponent accepted when recognizing polynomials.
const MAX_POLY_DEGREE: usize = 64;

impl Expr {
    /// Plain evaluation at `x`.
    pub fn eval(&self, x: f64) -> Result<f64, EvalError> {
        evaluate(self, x)
    }

    /// Value and derivatives one through four at `x`.
    pub fn eval_jet4(&self, x: f64) -> Result<Jet4, EvalError> {
        evaluate(self, Jet4::variable(x))
    }

    /// The expression as a polynomial in `x`, when it is one.
    ///
    /// Recognizes sums, products, negation, division by a nonzero constant
    /// and powers with a constant non-negative integer exponent.
    pub fn to_polynomial(&self) -> Option<Polynomial<f64>> {
        self.polynomial_in(&|v| v)
    }

    /// Exact rational form of [`Expr::to_polynomial`]: every literal is taken
    /// at its exact binary value and all arithmetic is rational.
    pub fn to_rational_polynomial(&self) -> Option<RationalPolynomial> {
        self.polynomial_in(&|v| rational_from_f64(v))
    }

    fn polynomial_in<T: Coefficient>(&self, lift: &dyn Fn(f64) -> T) -> Option<Polynomial<T>> {
        let p = match self {
            Expr::Number(v) => Polynomial::constant(lift(*v)),
            Expr::Const(c) => Polynomial::constant(lift(c.value())),
            Expr::Var => Polynomial::x(),
            Expr::Neg(inner) => -&inner.polynomial_in(lift)?,
            Expr::Call(..) => return None,
            Expr::Binary(op, l, r) => {
                let lhs = l.polynomial_in(lift)?;
                match op {
                    BinOp::Add => &lhs + &r.polynomial_in(lift)?,
                    BinOp::Sub => &lhs - &r.polynomial_in(lift)?,
                    BinOp::Mul => &lhs * &r.polynomial_in(lift)?,
                    BinOp::Div => {
                        let rhs = r.polynomial_in(lift)?;
                        if rhs.degree() > 0 || rhs.is_zero() {
                            return None;
                        }
                        lhs.scale(&(T::one() / rhs.leading_coefficient()))
                    }
                    BinOp::Pow => {
                        if r.depends_on_x() {
                            return None;
                        }
                        let n = r.eval(0.0).ok()?;
                        if n.fract() != 0.0 || n < 0.0 || n > MAX_POLY_DEGREE as f64 {
                            return None;
                        }
                        lhs.pow(n as u32)
                    }
                }
            }
        };
        (p.degree() <= MAX_POLY_DEGREE).then_some(p)
    }
}
