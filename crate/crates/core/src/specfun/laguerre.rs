use super::gamma::ln_gamma;
use super::nu::{MultiIndex, NuVector};
use crate::error::{domain, usage, Result};
use crate::scalar::Real;

fn check_nu<T: Real>(nu: T) -> Result<()> {
    if !(nu > -T::one()) || !nu.is_finite() {
        return Err(domain(format!("Laguerre order must exceed -1, got {nu}")));
    }
    Ok(())
}

/// Laguerre polynomial `L_k^ν(x)` by the forward three-term recurrence.
pub fn laguerre_polynomial<T: Real>(k: usize, nu: T, x: T) -> Result<T> {
    check_nu(nu)?;
    if !(x >= T::zero()) {
        return Err(domain(format!("Laguerre polynomial argument must be non-negative, got {x}")));
    }
    let mut prev = T::zero();
    let mut cur = T::one();
    for m in 0..k {
        let mf = T::lit(m as f64);
        let next = ((T::lit(2.0) * mf + T::one() + nu - x) * cur - (mf + nu) * prev) / (mf + T::one());
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// Laguerre function `φ_k^ν(x)`.
pub fn laguerre_function<T: Real>(k: usize, nu: T, x: T) -> Result<T> {
    Ok(laguerre_functions_upto(k, nu, x)?[k])
}

/// `[φ_0^ν(x), …, φ_kmax^ν(x)]` from one pass of the normalized recurrence.
pub fn laguerre_functions_upto<T: Real>(kmax: usize, nu: T, x: T) -> Result<Vec<T>> {
    check_nu(nu)?;
    if !(x > T::zero()) || !x.is_finite() {
        return Err(domain(format!("Laguerre function needs x > 0, got {x}")));
    }
    let mut out = vec![T::zero(); kmax + 1];
    fill_functions(nu, x, &mut out);
    Ok(out)
}

/// Unchecked kernel of [`laguerre_functions_upto`]; `out.len() - 1` is the top degree.
///
/// Works with `ψ_k = (Γ(k+1)/Γ(k+ν+1))^{1/2} L_k^ν(x²)` scaled by `Γ(ν+1)^{1/2}`,
/// which obeys
/// `√((k+1)(k+ν+1)) ψ_{k+1} = (2k+1+ν-x²) ψ_k - √(k(k+ν)) ψ_{k-1}`;
/// the prefactor `√2 x^{ν+1/2} e^{-x²/2} / √Γ(ν+1)` is carried as a logarithm
/// and the recurrence is rescaled whenever it grows.
pub(crate) fn fill_functions<T: Real>(nu: T, x: T, out: &mut [T]) {
    let s = x * x;
    let half = T::lit(0.5);
    let mut ln_scale = half * T::LN_2() - half * ln_gamma(nu + T::one()) + (nu + half) * x.ln() - half * s;
    let big = T::max_value().sqrt().sqrt();
    let ln_big = big.ln();
    let mut prev = T::zero();
    let mut cur = T::one();
    for (k, slot) in out.iter_mut().enumerate() {
        *slot = if cur == T::zero() { T::zero() } else { cur.signum() * (cur.abs().ln() + ln_scale).exp() };
        let kf = T::lit(k as f64);
        let next = ((T::lit(2.0) * kf + T::one() + nu - s) * cur - (kf * (kf + nu)).sqrt() * prev)
            / ((kf + T::one()) * (kf + nu + T::one())).sqrt();
        prev = cur;
        cur = next;
        if cur.abs() > big {
            cur = cur / big;
            prev = prev / big;
            ln_scale = ln_scale + ln_big;
        }
    }
}

/// `φ_k^ν(x) = Π_j φ_{k_j}^{ν_j}(x_j)`.
pub fn laguerre_function_nd<T: Real>(k: &MultiIndex, nu: &NuVector<T>, x: &[T]) -> Result<T> {
    if k.n() != nu.n() || x.len() != nu.n() {
        return Err(usage(format!(
            "dimension mismatch: k has {}, ν has {}, x has {} components",
            k.n(),
            nu.n(),
            x.len()
        )));
    }
    let mut prod = T::one();
    for j in 0..nu.n() {
        prod = prod * laguerre_function(k.get(j), nu.get(j), x[j])?;
    }
    Ok(prod)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `L_k^ν(x) = Σ_i (-1)^i C(k+ν, k-i) x^i / i!` with the generalized binomial
    /// formed as a finite product of rationals in ν.
    fn monomial_oracle(k: usize, nu: f64, x: f64) -> f64 {
        let mut total = 0.0;
        for i in 0..=k {
            let mut binom = 1.0;
            for m in 1..=(k - i) {
                binom *= (i as f64 + nu + m as f64) / m as f64;
            }
            let mut pow = 1.0;
            for m in 1..=i {
                pow *= x / m as f64;
            }
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            total += sign * binom * pow;
        }
        total
    }

    fn oracle_function(k: usize, nu: f64, x: f64) -> f64 {
        let norm = (2.0 * (ln_gamma(k as f64 + 1.0) - ln_gamma(k as f64 + nu + 1.0)).exp()).sqrt();
        norm * monomial_oracle(k, nu, x * x) * x.powf(nu + 0.5) * (-x * x / 2.0).exp()
    }

    #[test]
    fn low_degree_polynomials() {
        assert_eq!(laguerre_polynomial(0, 0.3_f64, 7.0).unwrap(), 1.0);
        assert!((laguerre_polynomial(1, 0.3_f64, 2.0).unwrap() + 0.7).abs() < 1e-15);
    }

    #[test]
    fn polynomial_matches_monomial_expansion() {
        let got = laguerre_polynomial(5, -0.5_f64, 1.25).unwrap();
        let want = monomial_oracle(5, -0.5, 1.25);
        assert!(((got - want) / want).abs() < 1e-10);
        for k in 0..12 {
            for &nu in &[-0.9, 0.0, 0.7, 2.5] {
                let got = laguerre_polynomial(k, nu, 0.8).unwrap();
                let want = monomial_oracle(k, nu, 0.8);
                assert!((got - want).abs() < 1e-10 * want.abs().max(1.0), "k={k} nu={nu}");
            }
        }
    }

    #[test]
    fn ground_state_closed_form() {
        let got = laguerre_function(0, -0.5_f64, 1.0).unwrap();
        let want = (2.0 / std::f64::consts::PI.sqrt()).sqrt() * (-0.5f64).exp();
        assert!((got - want).abs() < 1e-14);
        assert!((got - 0.64429).abs() < 1e-5);
    }

    #[test]
    fn function_matches_oracle() {
        let got = laguerre_function(3, 0.7_f64, 0.5).unwrap();
        let want = oracle_function(3, 0.7, 0.5);
        assert!(((got - want) / want).abs() < 1e-10);
    }

    #[test]
    fn high_degree_stays_finite() {
        let vals = laguerre_functions_upto(500, -0.75_f64, 3.0).unwrap();
        assert!(vals.iter().all(|v| v.is_finite()));
        let vals = laguerre_functions_upto(500, 1.7_f64, 40.0).unwrap();
        assert!(vals.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn nd_is_a_product() {
        let nu = NuVector::new(vec![-0.5_f64, -0.5]).unwrap();
        let k = MultiIndex::new(vec![1, 0]);
        let got = laguerre_function_nd(&k, &nu, &[1.0, 1.0]).unwrap();
        let want = oracle_function(1, -0.5, 1.0) * oracle_function(0, -0.5, 1.0);
        assert!((got - want).abs() < 1e-14);
        assert!(matches!(laguerre_function_nd(&k, &nu, &[1.0]), Err(crate::Error::Usage(_))));
    }

    #[test]
    fn domain_errors() {
        assert!(laguerre_function(0, 0.0_f64, 0.0).is_err());
        assert!(laguerre_polynomial(2, -1.0_f64, 1.0).is_err());
    }
}
