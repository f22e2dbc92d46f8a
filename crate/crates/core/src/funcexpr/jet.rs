//! Second-order forward-mode jets.

use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::Serialize;

use crate::Real;

/// Value of a function of `r` together with its first two derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Jet2<T> {
    pub value: T,
    pub d1: T,
    pub d2: T,
}

impl<T: Real> Jet2<T> {
    pub fn new(value: T, d1: T, d2: T) -> Self {
        Jet2 { value, d1, d2 }
    }

    pub fn constant(value: T) -> Self {
        Jet2::new(value, T::zero(), T::zero())
    }

    /// The independent variable itself, seeded with unit slope.
    pub fn variable(r: T) -> Self {
        Jet2::new(r, T::one(), T::zero())
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite() && self.d1.is_finite() && self.d2.is_finite()
    }

    /// Composes an outer scalar function `f` with this jet, given
    /// `(f(x), f'(x), f''(x))` at `x = self.value`.
    #[inline]
    pub fn chain(self, f0: T, f1: T, f2: T) -> Self {
        Jet2 {
            value: f0,
            d1: f1 * self.d1,
            d2: f2 * self.d1 * self.d1 + f1 * self.d2,
        }
    }

    pub fn recip(self) -> Self {
        let inv = self.value.recip();
        let inv2 = inv * inv;
        self.chain(inv, -inv2, T::lit(2.0) * inv2 * inv)
    }

    pub fn sin(self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.chain(s, c, -s)
    }

    pub fn cos(self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.chain(c, -s, -c)
    }

    pub fn tan(self) -> Self {
        let t = self.value.tan();
        let sec2 = T::one() + t * t;
        self.chain(t, sec2, T::lit(2.0) * t * sec2)
    }

    pub fn sinh(self) -> Self {
        let (s, c) = (self.value.sinh(), self.value.cosh());
        self.chain(s, c, s)
    }

    pub fn cosh(self) -> Self {
        let (s, c) = (self.value.sinh(), self.value.cosh());
        self.chain(c, s, c)
    }

    pub fn tanh(self) -> Self {
        let t = self.value.tanh();
        let sech2 = T::one() - t * t;
        self.chain(t, sech2, -T::lit(2.0) * t * sech2)
    }

    /// Hyperbolic cotangent as `cosh/sinh`; the caller rules out `x = 0`.
    pub fn coth(self) -> Self {
        let c = self.value.cosh() / self.value.sinh();
        let d = T::one() - c * c;
        self.chain(c, d, -T::lit(2.0) * c * d)
    }

    pub fn exp(self) -> Self {
        let e = self.value.exp();
        self.chain(e, e, e)
    }

    pub fn ln(self) -> Self {
        let inv = self.value.recip();
        self.chain(self.value.ln(), inv, -inv * inv)
    }

    pub fn sqrt(self) -> Self {
        let s = self.value.sqrt();
        let d1 = T::lit(0.5) / s;
        self.chain(s, d1, -d1 / (T::lit(2.0) * self.value))
    }

    /// `|x|` with derivative `sign(x)`; the kink at 0 gets slope 0.
    pub fn abs(self) -> Self {
        let sign = if self.value > T::zero() {
            T::one()
        } else if self.value < T::zero() {
            -T::one()
        } else {
            T::zero()
        };
        self.chain(self.value.abs(), sign, T::zero())
    }

    pub fn atan(self) -> Self {
        let x = self.value;
        let q = (T::one() + x * x).recip();
        self.chain(x.atan(), q, -T::lit(2.0) * x * q * q)
    }

    /// `x^p` for a constant exponent. Integer exponents are valid for any
    /// base; the derivative terms with a vanishing coefficient are exactly 0.
    pub fn powf(self, p: T) -> Self {
        let x = self.value;
        let one = T::one();
        let two = T::lit(2.0);
        let term = |coef: T, e: T| {
            if coef == T::zero() {
                T::zero()
            } else {
                coef * x.powf(e)
            }
        };
        if p.fract() == T::zero() && p.abs() < T::lit(i32::MAX as f64) {
            let n = p.to_i32().expect("integer exponent fits i32");
            let pow = |k: i32| x.powi(k);
            let t1 = if p == T::zero() { T::zero() } else { p * pow(n - 1) };
            let c2 = p * (p - one);
            let t2 = if c2 == T::zero() { T::zero() } else { c2 * pow(n - 2) };
            return self.chain(pow(n), t1, t2);
        }
        self.chain(x.powf(p), term(p, p - one), term(p * (p - one), p - two))
    }

    /// `self^rhs` for a non-constant exponent; requires a positive base.
    pub fn pow(self, rhs: Self) -> Self {
        (rhs * self.ln()).exp()
    }
}

impl<T: Real> Add for Jet2<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Jet2::new(self.value + rhs.value, self.d1 + rhs.d1, self.d2 + rhs.d2)
    }
}

impl<T: Real> Sub for Jet2<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Jet2::new(self.value - rhs.value, self.d1 - rhs.d1, self.d2 - rhs.d2)
    }
}

impl<T: Real> Mul for Jet2<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let two = T::lit(2.0);
        Jet2::new(
            self.value * rhs.value,
            self.d1 * rhs.value + self.value * rhs.d1,
            self.d2 * rhs.value + two * self.d1 * rhs.d1 + self.value * rhs.d2,
        )
    }
}

impl<T: Real> Div for Jet2<T> {
    type Output = Self;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Self) -> Self {
        self * rhs.recip()
    }
}

impl<T: Real> Neg for Jet2<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Jet2::new(-self.value, -self.d1, -self.d2)
    }
}

impl<T: Real> Mul<T> for Jet2<T> {
    type Output = Self;
    fn mul(self, k: T) -> Self {
        Jet2::new(self.value * k, self.d1 * k, self.d2 * k)
    }
}
