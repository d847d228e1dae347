//! Truncated Taylor arithmetic of order four.

use std::ops::{Add, Mul, Neg, Sub};

const BINOMIAL: [[f64; 5]; 5] = [
    [1.0, 0.0, 0.0, 0.0, 0.0],
    [1.0, 1.0, 0.0, 0.0, 0.0],
    [1.0, 2.0, 1.0, 0.0, 0.0],
    [1.0, 3.0, 3.0, 1.0, 0.0],
    [1.0, 4.0, 6.0, 4.0, 1.0],
];

/// Value and first four derivatives of a function at one point.
///
/// Entries are derivatives, not Taylor coefficients: `derivative(k)` is
/// `f^(k)(x)` with no `1/k!` factor. Products follow the Leibniz rule and
/// compositions follow Faà di Bruno's formula, both truncated at order four.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet4 {
    d: [f64; 5],
}

impl Jet4 {
    pub fn new(d: [f64; 5]) -> Self {
        Jet4 { d }
    }

    pub fn constant(c: f64) -> Self {
        Jet4 { d: [c, 0.0, 0.0, 0.0, 0.0] }
    }

    /// The identity function seeded at `x`.
    pub fn variable(x: f64) -> Self {
        Jet4 { d: [x, 1.0, 0.0, 0.0, 0.0] }
    }

    pub fn value(&self) -> f64 {
        self.d[0]
    }

    pub fn derivative(&self, k: usize) -> f64 {
        self.d[k]
    }

    pub fn derivatives(&self) -> [f64; 5] {
        self.d
    }

    pub fn is_constant(&self) -> bool {
        self.d[1..].iter().all(|&v| v == 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.d.iter().all(|v| v.is_finite())
    }

    /// `g(self)` where `g` has derivatives `g[0..=4]` at `self.value()`.
    pub fn compose(&self, g: [f64; 5]) -> Jet4 {
        let [_, u1, u2, u3, u4] = self.d;
        Jet4 {
            d: [
                g[0],
                g[1] * u1,
                g[2] * u1 * u1 + g[1] * u2,
                g[3] * u1 * u1 * u1 + 3.0 * g[2] * u1 * u2 + g[1] * u3,
                g[4] * u1.powi(4) + 6.0 * g[3] * u1 * u1 * u2 + g[2] * (3.0 * u2 * u2 + 4.0 * u1 * u3) + g[1] * u4,
            ],
        }
    }

    /// Quotient by the recurrence `(q b)^(n) = a^(n)`; callers check that
    /// the divisor value is nonzero.
    pub fn div(&self, rhs: &Jet4) -> Jet4 {
        let mut q = [0.0; 5];
        for n in 0..5 {
            let mut acc = self.d[n];
            for k in 0..n {
                acc -= BINOMIAL[n][k] * q[k] * rhs.d[n - k];
            }
            q[n] = acc / rhs.d[0];
        }
        Jet4 { d: q }
    }

    pub fn sin(&self) -> Jet4 {
        let (s, c) = self.d[0].sin_cos();
        self.compose([s, c, -s, -c, s])
    }

    pub fn cos(&self) -> Jet4 {
        let (s, c) = self.d[0].sin_cos();
        self.compose([c, -s, -c, s, c])
    }

    pub fn exp(&self) -> Jet4 {
        let e = self.d[0].exp();
        self.compose([e; 5])
    }

    pub fn ln(&self) -> Jet4 {
        let t = self.d[0];
        let r = 1.0 / t;
        self.compose([t.ln(), r, -r * r, 2.0 * r * r * r, -6.0 * r * r * r * r])
    }

    pub fn sqrt(&self) -> Jet4 {
        let t = self.d[0];
        let s = t.sqrt();
        self.compose([s, 0.5 / s, -0.25 / (s * t), 0.375 / (s * t * t), -0.9375 / (s * t * t * t)])
    }

    /// `self^r` for a constant exponent.
    pub fn powf(&self, r: f64) -> Jet4 {
        let t = self.d[0];
        let integer = r.fract() == 0.0;
        let mut g = [t.powf(r), 0.0, 0.0, 0.0, 0.0];
        let mut falling = 1.0;
        for (k, slot) in g.iter_mut().enumerate().skip(1) {
            falling *= r - (k as f64 - 1.0);
            // Zero falling factorial kills the term even where t^(r-k) blows up.
            *slot = if falling == 0.0 {
                0.0
            } else if integer {
                falling * t.powi((r - k as f64) as i32)
            } else {
                falling * t.powf(r - k as f64)
            };
        }
        self.compose(g)
    }

    /// `self^exponent` for a varying exponent, through `exp(exponent * ln(self))`.
    /// The value slot is taken from `powf` so it matches plain evaluation.
    pub fn pow(&self, exponent: &Jet4) -> Jet4 {
        let value = self.d[0].powf(exponent.d[0]);
        let h = *exponent * self.ln();
        let mut out = h.compose([value; 5]);
        out.d[0] = value;
        out
    }
}

impl Add for Jet4 {
    type Output = Jet4;

    fn add(self, rhs: Jet4) -> Jet4 {
        let mut d = self.d;
        d.iter_mut().zip(rhs.d).for_each(|(a, b)| *a += b);
        Jet4 { d }
    }
}

impl Sub for Jet4 {
    type Output = Jet4;

    fn sub(self, rhs: Jet4) -> Jet4 {
        let mut d = self.d;
        d.iter_mut().zip(rhs.d).for_each(|(a, b)| *a -= b);
        Jet4 { d }
    }
}

impl Mul for Jet4 {
    type Output = Jet4;

    fn mul(self, rhs: Jet4) -> Jet4 {
        let mut d = [0.0; 5];
        for (n, slot) in d.iter_mut().enumerate() {
            let mut acc = self.d[0] * rhs.d[n];
            for (k, binomial) in BINOMIAL[n].iter().enumerate().take(n + 1).skip(1) {
                acc += binomial * self.d[k] * rhs.d[n - k];
            }
            *slot = acc;
        }
        Jet4 { d }
    }
}

impl Neg for Jet4 {
    type Output = Jet4;

    fn neg(self) -> Jet4 {
        Jet4 { d: self.d.map(|v| -v) }
    }
}
