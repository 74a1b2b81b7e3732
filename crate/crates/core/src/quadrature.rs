//! Gauss–Legendre rules, adaptive integration and the log-time rule used by
//! the subordination integrals.

use crate::error::{domain, usage, Result};
use crate::scalar::Real;

/// Nodes and weights of the `m`-point Gauss–Legendre rule on `[-1, 1]`,
/// ascending.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(m, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(m, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[m - 1 - i] = x;
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if m == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=m {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Fixed rule mapped to `[a, b]`.
pub fn gauss_legendre_on<T: Real>(a: T, b: T, m: usize) -> (Vec<T>, Vec<T>) {
    let (x, w) = gauss_legendre(m);
    let half = (b - a) * T::lit(0.5);
    let mid = (a + b) * T::lit(0.5);
    let nodes = x.iter().map(|&xi| mid + half * T::lit(xi)).collect();
    let weights = w.iter().map(|&wi| half * T::lit(wi)).collect();
    (nodes, weights)
}

const ADAPTIVE_ORDER: usize = 16;
const ADAPTIVE_MAX_DEPTH: usize = 40;

/// Adaptive Gauss–Legendre integration of a smooth function on `[a, b]`.
///
/// Each interval is accepted when the 16-point value agrees with the sum of
/// the two half-interval values to `tol` (absolute, distributed by length).
pub fn integrate_adaptive<T: Real, F: Fn(T) -> T>(f: F, a: T, b: T, tol: T) -> Result<T> {
    if !(b > a) {
        return Err(usage(format!("empty interval [{a}, {b}]")));
    }
    if !(tol > T::zero()) {
        return Err(domain("tolerance must be positive"));
    }
    let (x, w) = gauss_legendre(ADAPTIVE_ORDER);
    let x: Vec<T> = x.into_iter().map(T::lit).collect();
    let w: Vec<T> = w.into_iter().map(T::lit).collect();
    let rule = |lo: T, hi: T| -> T {
        let half = (hi - lo) * T::lit(0.5);
        let mid = (hi + lo) * T::lit(0.5);
        x.iter().zip(&w).map(|(&xi, &wi)| wi * f(mid + half * xi)).sum::<T>() * half
    };
    let total_len = b - a;
    let mut stack = vec![(a, b, rule(a, b), 0usize)];
    let mut acc = T::zero();
    while let Some((lo, hi, whole, depth)) = stack.pop() {
        let mid = (lo + hi) * T::lit(0.5);
        let left = rule(lo, mid);
        let right = rule(mid, hi);
        let local_tol = tol * (hi - lo) / total_len;
        if (left + right - whole).abs() <= local_tol || depth >= ADAPTIVE_MAX_DEPTH {
            acc = acc + left + right;
        } else {
            stack.push((lo, mid, left, depth + 1));
            stack.push((mid, hi, right, depth + 1));
        }
    }
    Ok(acc)
}

/// Trapezoidal rule in `u = ln t` for integrals `∫ g(t) dt/t`.
///
/// Nodes are equally spaced in `ln t` and every node carries the full step as
/// weight; the part below `t_min` is added separately by
/// [`TimeQuadrature::head`] for integrands behaving like `t^a` near zero.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeQuadrature<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
    step: T,
}

impl<T: Real> TimeQuadrature<T> {
    pub fn log_spaced(t_min: T, t_max: T, count: usize) -> Result<Self> {
        if count < 2 {
            return Err(usage("time quadrature needs at least two nodes"));
        }
        if !(t_min > T::zero()) || !(t_max > t_min) {
            return Err(domain(format!("time range must satisfy 0 < t_min < t_max, got [{t_min}, {t_max}]")));
        }
        let (u0, u1) = (t_min.ln(), t_max.ln());
        let step = (u1 - u0) / T::lit((count - 1) as f64);
        let nodes = (0..count).map(|i| (u0 + step * T::lit(i as f64)).exp()).collect();
        let weights = vec![step; count];
        Ok(Self { nodes, weights, step })
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn t_min(&self) -> T {
        self.nodes[0]
    }

    pub fn t_max(&self) -> T {
        self.nodes[self.nodes.len() - 1]
    }

    pub fn step(&self) -> T {
        self.step
    }

    /// Contribution of the virtual nodes below `t_min` when the integrand
    /// (in `u`) decays like `e^{a u}`: `h F(u_0) e^{-ah} / (1 - e^{-ah})`.
    pub fn head(&self, first_value: T, a: T) -> T {
        let q = (-a * self.step).exp();
        self.step * first_value * q / (T::one() - q)
    }

    /// Applies the rule to samples `g(t_i)` (already including any `t` powers).
    pub fn integrate(&self, values: &[T]) -> T {
        values.iter().zip(&self.weights).map(|(&v, &w)| v * w).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_is_exact_for_high_degree_polynomials() {
        let (x, w) = gauss_legendre(16);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        for deg in 0..=31 {
            let got: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(deg)).sum();
            let want = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            assert!((got - want).abs() < 1e-14, "deg={deg}");
        }
        assert!(x.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn adaptive_handles_peaked_integrand() {
        let got = integrate_adaptive(|x: f64| (-(x - 0.3).powi(2) / 1e-4).exp(), 0.0, 1.0, 1e-12).unwrap();
        let want = (std::f64::consts::PI * 1e-4).sqrt();
        assert!((got - want).abs() < 1e-11);
    }

    #[test]
    fn time_rule_with_head_integrates_power_times_exponential() {
        // ∫_0^∞ t^{1/2} e^{-3t} dt/t = Γ(1/2)/√3
        let tq = TimeQuadrature::<f64>::log_spaced(1e-5, 50.0, 120).unwrap();
        let vals: Vec<f64> = tq.nodes().iter().map(|&t| t.sqrt() * (-3.0 * t).exp()).collect();
        let got = tq.integrate(&vals) + tq.head(vals[0], 0.5);
        let want = std::f64::consts::PI.sqrt() / 3f64.sqrt();
        // the head assumes a pure power law, so it is off by about 3 t_min relative
        assert!(((got - want) / want).abs() < 1e-6, "got={got} want={want}");
    }
}
