//! Exponentially scaled modified Bessel function of the first kind.
//!
//! Everything here returns `e^{-z} I_α(z)` (or its logarithm) so callers never
//! form `e^z`. Small and moderate arguments use the power series
//!
//! ```text
//! I_α(z) = (z/2)^α / Γ(α+1) · Σ_k (z²/4)^k / (k! (α+1)_k)
//! ```
//!
//! which has only positive terms for `α > -1`; large arguments use the Hankel
//! expansion `e^{-z} I_α(z) ~ (2πz)^{-1/2} Σ_k (-1)^k a_k(α) z^{-k}`.

use super::gamma::ln_gamma;
use crate::error::{domain, Result};
use crate::scalar::Real;

const SERIES_FLOOR: f64 = 25.0;
const MAX_SERIES_TERMS: usize = 2000;
const MIN_ASYMPTOTIC_TERMS: usize = 6;
const MAX_ASYMPTOTIC_TERMS: usize = 80;

fn check_order<T: Real>(alpha: T) -> Result<()> {
    if !(alpha > -T::one()) || !alpha.is_finite() {
        return Err(domain(format!("Bessel order must exceed -1, got {alpha}")));
    }
    Ok(())
}

fn uses_series<T: Real>(alpha: T, z: T) -> bool {
    z <= T::lit(SERIES_FLOOR).max(T::lit(2.0) * alpha * alpha)
}

/// `e^{-z} I_α(z)` for `α > -1`, `z >= 0`.
///
/// At `z = 0` the value is `0` for `α > 0`, `1` for `α = 0` and `+∞` for
/// `α ∈ (-1, 0)`.
pub fn bessel_i_scaled<T: Real>(alpha: T, z: T) -> Result<T> {
    check_order(alpha)?;
    if !(z >= T::zero()) || !z.is_finite() {
        return Err(domain(format!("Bessel argument must be finite and non-negative, got {z}")));
    }
    if z == T::zero() {
        return Ok(if alpha > T::zero() {
            T::zero()
        } else if alpha == T::zero() {
            T::one()
        } else {
            T::infinity()
        });
    }
    Ok(ln_scaled_unchecked(alpha, z, z.ln()).exp())
}

/// `ln(e^{-z} I_α(z))` for `z > 0`.
pub fn ln_bessel_i_scaled<T: Real>(alpha: T, z: T) -> Result<T> {
    check_order(alpha)?;
    if !(z > T::zero()) || !z.is_finite() {
        return Err(domain(format!("log-scaled Bessel needs z > 0, got {z}")));
    }
    Ok(ln_scaled_unchecked(alpha, z, z.ln()))
}

/// Same as [`ln_bessel_i_scaled`] but takes `ln z` alongside `z`, so callers
/// can pass arguments whose `z` underflows while `ln z` is still exact.
pub(crate) fn ln_scaled_unchecked<T: Real>(alpha: T, z: T, ln_z: T) -> T {
    if uses_series(alpha, z) {
        ln_series(alpha, z, ln_z)
    } else {
        ln_asymptotic(alpha, z)
    }
}

fn ln_series<T: Real>(alpha: T, z: T, ln_z: T) -> T {
    let q = z * z / T::lit(4.0);
    // compensated summation of the positive series, starting at 1
    let mut sum = T::one();
    let mut comp = T::zero();
    let mut term = T::one();
    for k in 1..=MAX_SERIES_TERMS {
        let kf = T::lit(k as f64);
        term = term * q / (kf * (alpha + kf));
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        if term <= T::epsilon() * sum * T::lit(0.25) {
            break;
        }
    }
    alpha * (ln_z - T::LN_2()) - ln_gamma(alpha + T::one()) + sum.ln() - z
}

fn ln_asymptotic<T: Real>(alpha: T, z: T) -> T {
    let mu = T::lit(4.0) * alpha * alpha;
    let mut sum = T::one();
    let mut term = T::one();
    for k in 1..=MAX_ASYMPTOTIC_TERMS {
        let kf = T::lit(k as f64);
        let odd = T::lit((2 * k - 1) as f64);
        let next = -term * (mu - odd * odd) / (T::lit(8.0) * kf * z);
        if next == T::zero() {
            break;
        }
        if k > MIN_ASYMPTOTIC_TERMS && next.abs() > term.abs() {
            // past the smallest term of the divergent expansion
            break;
        }
        sum = sum + next;
        term = next;
        if k >= MIN_ASYMPTOTIC_TERMS && term.abs() <= T::epsilon() * sum.abs() {
            break;
        }
    }
    sum.ln() - T::lit(0.5) * (T::lit(2.0) * T::PI() * z).ln()
}
