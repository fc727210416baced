use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_rational::Rational64;
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, Signed, ToPrimitive, Zero};

/// Numeric literal: exact rational, or an IEEE double.
///
/// Arithmetic stays exact while both operands are rational and no `i64`
/// overflow occurs; otherwise it falls back to floats.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Number {
    Rational(Rational64),
    Float(f64),
}

impl Number {
    pub fn int(v: i64) -> Number {
        Number::Rational(Rational64::from_integer(v))
    }

    pub fn rational(num: i64, den: i64) -> Number {
        Number::Rational(Rational64::new(num, den))
    }

    pub fn to_f64(self) -> f64 {
        match self {
            Number::Rational(r) => r.to_f64().unwrap_or(f64::NAN),
            Number::Float(f) => f,
        }
    }

    pub fn is_zero(self) -> bool {
        match self {
            Number::Rational(r) => r.is_zero(),
            Number::Float(f) => f == 0.0,
        }
    }

    pub fn is_one(self) -> bool {
        match self {
            Number::Rational(r) => r == Rational64::from_integer(1),
            Number::Float(f) => f == 1.0,
        }
    }

    pub fn is_negative(self) -> bool {
        match self {
            Number::Rational(r) => r.is_negative(),
            Number::Float(f) => f.is_sign_negative(),
        }
    }

    pub fn as_integer(self) -> Option<i64> {
        match self {
            Number::Rational(r) if r.is_integer() => Some(r.to_integer()),
            _ => None,
        }
    }

    fn exact_or<F, G>(self, rhs: Number, exact: F, float: G) -> Number
    where
        F: Fn(&Rational64, &Rational64) -> Option<Rational64>,
        G: Fn(f64, f64) -> f64,
    {
        if let (Number::Rational(a), Number::Rational(b)) = (self, rhs) {
            if let Some(r) = exact(&a, &b) {
                return Number::Rational(r);
            }
        }
        Number::Float(float(self.to_f64(), rhs.to_f64()))
    }

    /// `None` when dividing by an exact or float zero.
    pub fn checked_div(self, rhs: Number) -> Option<Number> {
        if rhs.is_zero() {
            return None;
        }
        Some(self.exact_or(rhs, |a, b| a.checked_div(b), |a, b| a / b))
    }

    /// Exact power for rational base and small integer exponent.
    pub fn powi_exact(self, exp: i64) -> Option<Number> {
        let Number::Rational(base) = self else {
            return None;
        };
        if exp.unsigned_abs() > 64 || (exp < 0 && base.is_zero()) {
            return None;
        }
        let mut acc = Rational64::from_integer(1);
        for _ in 0..exp.unsigned_abs() {
            acc = acc.checked_mul(&base)?;
        }
        if exp < 0 {
            acc = Rational64::from_integer(1).checked_div(&acc)?;
        }
        Some(Number::Rational(acc))
    }
}

impl Neg for Number {
    type Output = Number;

    fn neg(self) -> Number {
        match self {
            Number::Rational(r) => Number::Rational(-r),
            Number::Float(f) => Number::Float(-f),
        }
    }
}

impl Add for Number {
    type Output = Number;

    fn add(self, rhs: Number) -> Number {
        self.exact_or(rhs, |a, b| a.checked_add(b), |a, b| a + b)
    }
}

impl Sub for Number {
    type Output = Number;

    fn sub(self, rhs: Number) -> Number {
        self.exact_or(rhs, |a, b| a.checked_sub(b), |a, b| a - b)
    }
}

impl Mul for Number {
    type Output = Number;

    fn mul(self, rhs: Number) -> Number {
        self.exact_or(rhs, |a, b| a.checked_mul(b), |a, b| a * b)
    }
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Number::Rational(r) => {
                if r.is_integer() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
            // `{:?}` always carries a '.' or an exponent and round-trips.
            Number::Float(v) => write!(f, "{v:?}"),
        }
    }
}
