use crate::scalar::Real;

// Lanczos approximation, g = 7, nine coefficients.
const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural logarithm of the gamma function for positive arguments.
///
/// Returns NaN for `x <= 0`; the toolkit only ever needs `Γ(k + ν + 1)` with
/// `k + ν + 1 > 0`.
pub fn ln_gamma<T: Real>(x: T) -> T {
    if !(x > T::zero()) {
        return T::nan();
    }
    if x < T::lit(0.5) {
        // reflection; sin(πx) > 0 on (0, 1/2)
        let pi = T::PI();
        return (pi / (pi * x).sin()).ln() - ln_gamma(T::one() - x);
    }
    let xm = x - T::one();
    let mut acc = T::lit(LANCZOS_COEFFS[0]);
    for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc = acc + T::lit(c) / (xm + T::lit(i as f64));
    }
    let t = xm + T::lit(LANCZOS_G + 0.5);
    T::lit(0.5) * (T::lit(2.0) * T::PI()).ln() + (xm + T::lit(0.5)) * t.ln() - t + acc.ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ln_factorial(n: u32) -> f64 {
        (1..=n).map(|k| (k as f64).ln()).sum()
    }

    #[test]
    fn integer_and_half_integer_values() {
        for n in 1..=30u32 {
            let got = ln_gamma(n as f64);
            let want = ln_factorial(n - 1);
            assert!((got - want).abs() <= 1e-13 * want.abs().max(1.0), "n={n}");
        }
        let half = ln_gamma(0.5_f64);
        assert!((half - 0.5 * std::f64::consts::PI.ln()).abs() < 1e-14);
    }

    #[test]
    fn recurrence_holds_across_the_range() {
        let mut x = 1e-3_f64;
        while x < 599.0 {
            let lhs = ln_gamma(x + 1.0) - ln_gamma(x);
            assert!((lhs - x.ln()).abs() < 1e-13 * (1.0 + ln_gamma(x).abs()), "x={x}");
            x *= 1.37;
        }
    }

    #[test]
    fn large_argument_matches_stirling_series() {
        let x = 600.0_f64;
        let stirling = (x - 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln() + 1.0 / (12.0 * x)
            - 1.0 / (360.0 * x.powi(3));
        assert!(((ln_gamma(x) - stirling) / stirling).abs() < 1e-14);
    }

    #[test]
    fn non_positive_is_nan() {
        assert!(ln_gamma(0.0_f64).is_nan());
        assert!(ln_gamma(-1.5_f64).is_nan());
    }
}
