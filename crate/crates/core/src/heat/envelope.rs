use serde::{Deserialize, Serialize};

use crate::error::{domain, usage, Result};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EnvelopeKind {
    /// `Π_j t^{-1/2} exp(-(x_j-y_j)²/(ct)) (1+√t/x_j)^a (1+√t/y_j)^a`
    H,
    /// `t^{-n/2} exp(-|x-y|²/(ct)) Π_j (1+√t/x_j)^β (1+√t/y_j)^σ`
    T,
}

/// Gaussian envelope with boundary factors near the origin.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeSpec<T> {
    pub kind: EnvelopeKind,
    pub a_or_beta: T,
    pub sigma: T,
    pub c: T,
    pub n: usize,
}

impl<T: Real> EnvelopeSpec<T> {
    pub fn h(a: T, c: T, n: usize) -> Result<Self> {
        let s = Self { kind: EnvelopeKind::H, a_or_beta: a, sigma: a, c, n };
        s.validate()?;
        Ok(s)
    }

    pub fn t(beta: T, sigma: T, c: T, n: usize) -> Result<Self> {
        let s = Self { kind: EnvelopeKind::T, a_or_beta: beta, sigma, c, n };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let half = T::lit(0.5);
        for e in [self.a_or_beta, self.sigma] {
            if !(e >= T::zero() && e < half) {
                return Err(domain(format!("envelope exponents must lie in [0, 1/2), got {e}")));
            }
        }
        if !(self.c > T::zero()) {
            return Err(domain(format!("Gaussian constant must be positive, got {}", self.c)));
        }
        if self.n == 0 {
            return Err(usage("envelope dimension must be positive"));
        }
        Ok(())
    }

    pub fn with_c(&self, c: T) -> Self {
        Self { c, ..*self }
    }

    /// Logarithm of the envelope value.
    pub fn ln_eval(&self, t: T, x: &[T], y: &[T]) -> Result<T> {
        self.validate()?;
        if x.len() != self.n || y.len() != self.n {
            return Err(usage(format!("envelope of dimension {} evaluated at {}/{} coordinates", self.n, x.len(), y.len())));
        }
        if !(t > T::zero()) || x.iter().chain(y).any(|v| !(*v > T::zero())) {
            return Err(domain("envelope needs t > 0 and positive coordinates"));
        }
        let mut acc = -T::lit(self.n as f64) * T::lit(0.5) * t.ln() + ln_gauss(t, self.c, x, y);
        for j in 0..self.n {
            acc = acc + self.a_or_beta * ln_boundary(t, x[j]) + self.sigma * ln_boundary(t, y[j]);
        }
        Ok(acc)
    }
}

/// Envelope value (may underflow to zero; use [`EnvelopeSpec::ln_eval`] for ratios).
pub fn envelope_eval<T: Real>(spec: &EnvelopeSpec<T>, t: T, x: &[T], y: &[T]) -> Result<T> {
    Ok(spec.ln_eval(t, x, y)?.exp())
}

/// `-|x-y|²/(ct)`.
pub fn ln_gauss<T: Real>(t: T, c: T, x: &[T], y: &[T]) -> T {
    let d2: T = x.iter().zip(y).map(|(&a, &b)| (a - b) * (a - b)).sum();
    -d2 / (c * t)
}

/// `ln(1 + √t/x)`.
pub fn ln_boundary<T: Real>(t: T, x: T) -> T {
    (t.sqrt() / x).ln_1p()
}
