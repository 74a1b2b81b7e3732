//! Scalar abstraction and signed log-magnitude arithmetic.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point scalar the numerical core is written against (`f32` or `f64`).
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + Sum + 'static
{
    /// Converts an `f64` literal into the scalar type.
    fn lit(x: f64) -> Self;

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    #[inline]
    fn lit(x: f64) -> Self {
        x
    }
}

impl Real for f32 {
    #[inline]
    fn lit(x: f64) -> Self {
        x as f32
    }
}

/// A real number stored as `sign * exp(ln_abs)`.
///
/// Kernel values routinely leave the representable range of `f64` at the
/// corners of the sweep grids; ratios of such values are formed here instead.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SignedLog<T> {
    pub sign: i8,
    pub ln_abs: T,
}

impl<T: Real> SignedLog<T> {
    pub fn zero() -> Self {
        Self { sign: 0, ln_abs: T::neg_infinity() }
    }

    pub fn positive(ln_abs: T) -> Self {
        if ln_abs == T::neg_infinity() {
            Self::zero()
        } else {
            Self { sign: 1, ln_abs }
        }
    }

    pub fn from_value(v: T) -> Self {
        if v == T::zero() {
            Self::zero()
        } else if v > T::zero() {
            Self { sign: 1, ln_abs: v.ln() }
        } else {
            Self { sign: -1, ln_abs: (-v).ln() }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    pub fn value(&self) -> T {
        match self.sign {
            0 => T::zero(),
            1 => self.ln_abs.exp(),
            _ => -self.ln_abs.exp(),
        }
    }

    /// Multiplies by an ordinary real number.
    pub fn scale(self, factor: T) -> Self {
        if self.is_zero() || factor == T::zero() {
            return Self::zero();
        }
        let sign = if factor < T::zero() { -self.sign } else { self.sign };
        Self { sign, ln_abs: self.ln_abs + factor.abs().ln() }
    }

    /// Multiplies by `exp(ln_factor)`.
    pub fn scale_ln(self, ln_factor: T) -> Self {
        if self.is_zero() {
            return self;
        }
        Self { sign: self.sign, ln_abs: self.ln_abs + ln_factor }
    }

    pub fn mul(self, other: Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        Self { sign: self.sign * other.sign, ln_abs: self.ln_abs + other.ln_abs }
    }

    /// Sums signed log values without leaving log space.
    pub fn sum(terms: &[Self]) -> Self {
        let max = terms
            .iter()
            .filter(|t| !t.is_zero())
            .map(|t| t.ln_abs)
            .fold(T::neg_infinity(), T::max);
        if max == T::neg_infinity() {
            return Self::zero();
        }
        if max == T::infinity() {
            let s: i32 = terms.iter().filter(|t| t.ln_abs == T::infinity()).map(|t| t.sign as i32).sum();
            return Self { sign: s.signum() as i8, ln_abs: T::infinity() };
        }
        let acc: T = terms
            .iter()
            .filter(|t| !t.is_zero())
            .map(|t| T::from_i8(t.sign).unwrap() * (t.ln_abs - max).exp())
            .sum();
        let out = Self::from_value(acc);
        out.scale_ln(max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signed_log_sum_matches_plain_arithmetic() {
        let vals = [3.5_f64, -1.25, 0.0, 7.0e-3];
        let logs: Vec<_> = vals.iter().map(|&v| SignedLog::from_value(v)).collect();
        let s = SignedLog::sum(&logs).value();
        assert!((s - vals.iter().sum::<f64>()).abs() < 1e-14);
    }

    #[test]
    fn signed_log_survives_underflow() {
        let a = SignedLog::<f64>::positive(-2000.0);
        let b = SignedLog::<f64>::positive(-2001.0).scale(-1.0);
        let s = SignedLog::sum(&[a, b]);
        assert_eq!(s.sign, 1);
        let expected = -2000.0 + (1.0 - (-1.0f64).exp()).ln();
        assert!((s.ln_abs - expected).abs() < 1e-12);
    }

    #[test]
    fn cancelling_terms_give_zero() {
        let a = SignedLog::<f64>::from_value(2.0);
        let s = SignedLog::sum(&[a, a.scale(-1.0)]);
        assert!(s.is_zero());
    }
}
