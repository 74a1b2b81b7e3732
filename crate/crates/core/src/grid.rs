//! Sample grids on `(0, ∞)^n` and functions sampled on them.

use serde::{Deserialize, Serialize};

use crate::error::{domain, usage, Result};
use crate::quadrature::gauss_legendre;
use crate::scalar::Real;

/// Layout of a composite Gauss–Legendre axis: geometric panels (ratio
/// `log_ratio`) from `x_min` up to `x_switch`, then panels of width
/// `linear_width` up to `x_max`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisSpec {
    pub x_min: f64,
    pub x_switch: f64,
    pub x_max: f64,
    pub log_ratio: f64,
    pub linear_width: f64,
    pub order: usize,
}

impl Default for AxisSpec {
    fn default() -> Self {
        Self { x_min: 1e-12, x_switch: 1.0, x_max: 20.0, log_ratio: 2.0, linear_width: 0.25, order: 16 }
    }
}

impl AxisSpec {
    /// Lighter layout for tensor grids in two dimensions.
    pub fn coarse() -> Self {
        Self { x_min: 1e-8, x_switch: 1.0, x_max: 9.0, log_ratio: 2.0, linear_width: 0.5, order: 16 }
    }

    pub fn breakpoints(&self) -> Result<Vec<f64>> {
        if !(self.x_min > 0.0 && self.x_switch > self.x_min && self.x_max > self.x_switch) {
            return Err(domain(format!(
                "axis needs 0 < x_min < x_switch < x_max, got {} {} {}",
                self.x_min, self.x_switch, self.x_max
            )));
        }
        if !(self.log_ratio > 1.0) || !(self.linear_width > 0.0) || self.order < 2 {
            return Err(usage("axis panels need log_ratio > 1, linear_width > 0 and order >= 2"));
        }
        let n_log = ((self.x_switch / self.x_min).ln() / self.log_ratio.ln()).ceil() as usize;
        let ratio = (self.x_switch / self.x_min).powf(1.0 / n_log as f64);
        let mut b: Vec<f64> = (0..n_log).map(|i| self.x_min * ratio.powi(i as i32)).collect();
        let n_lin = ((self.x_max - self.x_switch) / self.linear_width).ceil() as usize;
        let width = (self.x_max - self.x_switch) / n_lin as f64;
        b.extend((0..=n_lin).map(|i| self.x_switch + width * i as f64));
        Ok(b)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Panel<T> {
    pub a: T,
    pub b: T,
    pub start: usize,
    pub len: usize,
}

/// One axis: strictly increasing positive abscissae, optionally with
/// quadrature weights and a Gauss–Legendre panel structure.
#[derive(Clone, Debug, PartialEq)]
pub struct AxisGrid<T> {
    nodes: Vec<T>,
    weights: Option<Vec<T>>,
    panels: Vec<Panel<T>>,
    bary: Vec<T>,
}

impl<T: Real> AxisGrid<T> {
    /// Composite Gauss–Legendre grid; integrals get a power-law tail on `[0, x_min]`.
    pub fn quadrature(spec: &AxisSpec) -> Result<Self> {
        Self::from_breakpoints(&spec.breakpoints()?, spec.order)
    }

    pub fn from_breakpoints(breaks: &[f64], order: usize) -> Result<Self> {
        if breaks.len() < 2 || breaks.windows(2).any(|w| !(w[1] > w[0])) || !(breaks[0] > 0.0) {
            return Err(usage("panel breakpoints must be positive and strictly increasing"));
        }
        let (x, w) = gauss_legendre(order);
        let mut nodes = Vec::with_capacity(order * (breaks.len() - 1));
        let mut weights = Vec::with_capacity(nodes.capacity());
        let mut panels = Vec::with_capacity(breaks.len() - 1);
        for pair in breaks.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            panels.push(Panel { a: T::lit(a), b: T::lit(b), start: nodes.len(), len: order });
            for (xi, wi) in x.iter().zip(&w) {
                nodes.push(T::lit(mid + half * xi));
                weights.push(T::lit(half * wi));
            }
        }
        // barycentric weights of the Legendre points, (-1)^j sqrt((1 - x_j^2) w_j)
        let bary = x
            .iter()
            .zip(&w)
            .enumerate()
            .map(|(j, (xi, wi))| {
                let s = if j % 2 == 0 { 1.0 } else { -1.0 };
                T::lit(s * ((1.0 - xi * xi) * wi).sqrt())
            })
            .collect();
        Ok(Self { nodes, weights: Some(weights), panels, bary })
    }

    /// Plain grid without quadrature weights.
    pub fn from_nodes(nodes: Vec<T>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(usage("grid axis must contain at least one node"));
        }
        if !(nodes[0] > T::zero()) || nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(domain("grid abscissae must be positive and strictly increasing"));
        }
        Ok(Self { nodes, weights: None, panels: Vec::new(), bary: Vec::new() })
    }

    pub fn uniform(a: T, b: T, count: usize) -> Result<Self> {
        if count < 2 {
            return Err(usage("uniform grid needs at least two nodes"));
        }
        let h = (b - a) / T::lit((count - 1) as f64);
        Self::from_nodes((0..count).map(|i| a + h * T::lit(i as f64)).collect())
    }

    pub fn log_spaced(a: T, b: T, count: usize) -> Result<Self> {
        if !(a > T::zero()) {
            return Err(domain("log-spaced grid needs a positive lower end"));
        }
        if count == 1 {
            return Self::from_nodes(vec![a]);
        }
        let (la, lb) = (a.ln(), b.ln());
        let h = (lb - la) / T::lit((count.max(2) - 1) as f64);
        Self::from_nodes((0..count).map(|i| (la + h * T::lit(i as f64)).exp()).collect())
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> Option<&[T]> {
        self.weights.as_deref()
    }

    pub fn panels(&self) -> &[Panel<T>] {
        &self.panels
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn has_weights(&self) -> bool {
        self.weights.is_some()
    }

    /// Quadrature of sampled values over `(0, ∞)`, including the power-law
    /// extrapolation on `[0, x_0]` fitted to the first samples (see [`AxisGrid::tail`]).
    pub fn integrate(&self, values: &[T]) -> Result<T> {
        let w = self.weights.as_ref().ok_or_else(|| usage("grid carries no quadrature weights"))?;
        if values.len() != w.len() {
            return Err(usage(format!("expected {} samples, got {}", w.len(), values.len())));
        }
        let mut sum = T::zero();
        let mut comp = T::zero();
        for (&v, &wi) in values.iter().zip(w) {
            let y = v * wi - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
        }
        Ok(sum + self.tail(values))
    }

    /// `∫_0^{a}` of the samples' extrapolation, where `a` is the start of the
    /// first panel. The model is `F ≈ A x^s e^{κx}`, fitted to the first three
    /// samples; it falls back to a pure power law (`κ = 0`, two samples) when
    /// the three-point fit is not usable.
    pub fn tail(&self, values: &[T]) -> T {
        if self.panels.is_empty() || values.len() < 2 {
            return T::zero();
        }
        let (f0, f1) = (values[0], values[1]);
        if f0 == T::zero() || f1 == T::zero() || f0.signum() != f1.signum() {
            return T::zero();
        }
        let a = self.panels[0].a;
        let (x0, x1) = (self.nodes[0], self.nodes[1]);
        let slope = |fa: T, fb: T, xa: T, xb: T| (fb / fa).ln() / (xb / xa).ln();
        // mean of x in the log measure between two nodes
        let mid = |xa: T, xb: T| (xb - xa) / (xb / xa).ln();
        let s01 = slope(f0, f1, x0, x1);
        let (mut s, mut kappa) = (s01, T::zero());
        if values.len() > 2 && self.nodes.len() > 2 {
            let (f2, x2) = (values[2], self.nodes[2]);
            if f2 != T::zero() && f2.signum() == f0.signum() {
                let (m01, m12) = (mid(x0, x1), mid(x1, x2));
                let k = (slope(f1, f2, x1, x2) - s01) / (m12 - m01);
                let s3 = s01 - k * m01;
                if s3.is_finite() && s3 > -T::one() && (k * x2).abs() < T::lit(0.1) {
                    s = s3;
                    kappa = k;
                }
            }
        }
        if !(s > -T::one()) {
            return T::zero();
        }
        let one = T::one();
        let amp = f0 / ((x0 / a).powf(s) * (kappa * x0).exp());
        // A a^{s+1} (1/(s+1) + κa/(s+2)) with A a^s = amp
        amp * a * (one / (s + one) + kappa * a / (s + one + one))
    }

    fn panel_of(&self, x: T) -> Option<usize> {
        if self.panels.is_empty() || x < self.panels[0].a || x > self.panels[self.panels.len() - 1].b {
            return None;
        }
        let idx = self.panels.partition_point(|p| p.b < x);
        Some(idx.min(self.panels.len() - 1))
    }

    /// Evaluates the panel-wise interpolant of the samples at `x`.
    ///
    /// Below the first panel the power law of [`AxisGrid::tail`] is used; above
    /// the last panel the function is taken to vanish.
    pub fn interpolate(&self, values: &[T], x: T) -> Result<T> {
        if self.panels.is_empty() {
            return Err(usage("interpolation needs a panel grid"));
        }
        if x < self.panels[0].a {
            let (x0, x1, f0, f1) = (self.nodes[0], self.nodes[1], values[0], values[1]);
            if f0 == T::zero() || f1 == T::zero() || f0.signum() != f1.signum() {
                return Ok(f0);
            }
            let s = (f1 / f0).ln() / (x1 / x0).ln();
            return Ok(f0 * (x / x0).powf(s));
        }
        let Some(pi) = self.panel_of(x) else { return Ok(T::zero()) };
        let p = self.panels[pi];
        let mut num = T::zero();
        let mut den = T::zero();
        for j in 0..p.len {
            let xj = self.nodes[p.start + j];
            let d = x - xj;
            if d == T::zero() {
                return Ok(values[p.start + j]);
            }
            let c = self.bary[j] / d;
            num = num + c * values[p.start + j];
            den = den + c;
        }
        Ok(num / den)
    }

    /// First derivative of the panel-wise polynomial interpolant at every node.
    /// Exact for polynomials of degree below the panel order.
    pub fn panel_derivative(&self, values: &[T]) -> Result<Vec<T>> {
        if self.panels.is_empty() {
            return Err(usage("panel differentiation needs a panel grid"));
        }
        if values.len() != self.nodes.len() {
            return Err(usage(format!("expected {} samples, got {}", self.nodes.len(), values.len())));
        }
        let mut out = vec![T::zero(); values.len()];
        for p in &self.panels {
            let xs = &self.nodes[p.start..p.start + p.len];
            let fs = &values[p.start..p.start + p.len];
            for i in 0..p.len {
                let mut acc = T::zero();
                for j in 0..p.len {
                    if j != i {
                        let dij = self.bary[j] / self.bary[i] / (xs[i] - xs[j]);
                        acc = acc + dij * (fs[j] - fs[i]);
                    }
                }
                out[p.start + i] = acc;
            }
        }
        Ok(out)
    }

    /// First derivative at every node from 5-point finite-difference stencils
    /// (centred in the interior, one-sided at the ends).
    pub fn derivative(&self, values: &[T]) -> Result<Vec<T>> {
        let n = self.nodes.len();
        if n < 7 {
            return Err(usage(format!("stencil differentiation needs at least 7 nodes, got {n}")));
        }
        if values.len() != n {
            return Err(usage(format!("expected {n} samples, got {}", values.len())));
        }
        let mut out = vec![T::zero(); n];
        for (i, o) in out.iter_mut().enumerate() {
            let lo = i.saturating_sub(2).min(n - 5);
            let xs = &self.nodes[lo..lo + 5];
            let w = fornberg_weights(self.nodes[i], xs, 1);
            *o = (0..5).map(|m| w[1][m] * values[lo + m]).sum();
        }
        Ok(out)
    }
}

/// Finite-difference weights for derivatives `0..=order` at `z` from the
/// nodes `xs` (Fornberg's recursion). `w[d][j]` multiplies `f(xs[j])`.
pub fn fornberg_weights<T: Real>(z: T, xs: &[T], order: usize) -> Vec<Vec<T>> {
    let n = xs.len();
    let mut c = vec![vec![T::zero(); n]; order + 1];
    let mut c1 = T::one();
    let mut c4 = xs[0] - z;
    c[0][0] = T::one();
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = T::one();
        let c5 = c4;
        c4 = xs[i] - z;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 = c2 * c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    let kf = T::lit(k as f64);
                    c[k][i] = c1 * (kf * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                let kf = T::lit(k as f64);
                c[k][j] = (c4 * c[k][j] - kf * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Rectangular product grid; samples are stored row-major (last axis fastest).
#[derive(Clone, Debug, PartialEq)]
pub struct TensorGrid<T> {
    axes: Vec<AxisGrid<T>>,
}

impl<T: Real> TensorGrid<T> {
    pub fn new(axes: Vec<AxisGrid<T>>) -> Result<Self> {
        if axes.is_empty() {
            return Err(usage("tensor grid needs at least one axis"));
        }
        Ok(Self { axes })
    }

    pub fn single(axis: AxisGrid<T>) -> Self {
        Self { axes: vec![axis] }
    }

    pub fn repeated(axis: AxisGrid<T>, n: usize) -> Result<Self> {
        Self::new(vec![axis; n])
    }

    pub fn n(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[AxisGrid<T>] {
        &self.axes
    }

    pub fn axis(&self, j: usize) -> &AxisGrid<T> {
        &self.axes[j]
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.len()).collect()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.len()).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn has_weights(&self) -> bool {
        self.axes.iter().all(|a| a.has_weights())
    }

    /// Per-axis indices of the flat position `flat`.
    pub fn unravel(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.n()];
        for j in (0..self.n()).rev() {
            let m = self.axes[j].len();
            idx[j] = flat % m;
            flat /= m;
        }
        idx
    }

    pub fn point(&self, flat: usize) -> Vec<T> {
        self.unravel(flat).iter().zip(&self.axes).map(|(&i, a)| a.nodes[i]).collect()
    }

    /// Stride of axis `j` in the flat layout.
    pub fn stride(&self, j: usize) -> usize {
        self.axes[j + 1..].iter().map(|a| a.len()).product()
    }

    /// Iterated quadrature over all axes, innermost axis first, so the tail
    /// rule applies per axis.
    pub fn integrate(&self, values: &[T]) -> Result<T> {
        if values.len() != self.len() {
            return Err(usage(format!("expected {} samples, got {}", self.len(), values.len())));
        }
        let mut cur = values.to_vec();
        for axis in self.axes.iter().rev() {
            let m = axis.len();
            let mut next = Vec::with_capacity(cur.len() / m);
            for line in cur.chunks(m) {
                next.push(axis.integrate(line)?);
            }
            cur = next;
        }
        Ok(cur[0])
    }

    /// Applies `op` to every line of samples along axis `j`.
    pub fn map_lines<F>(&self, values: &[T], j: usize, op: F) -> Result<Vec<T>>
    where
        F: Fn(&[T]) -> Result<Vec<T>>,
    {
        let m = self.axes[j].len();
        let stride = self.stride(j);
        let outer = self.len() / (m * stride);
        let mut out = vec![T::zero(); values.len()];
        let mut line = vec![T::zero(); m];
        for o in 0..outer {
            for s in 0..stride {
                let base = o * m * stride + s;
                for (i, slot) in line.iter_mut().enumerate() {
                    *slot = values[base + i * stride];
                }
                let res = op(&line)?;
                for (i, v) in res.into_iter().enumerate() {
                    out[base + i * stride] = v;
                }
            }
        }
        Ok(out)
    }
}

/// Real function sampled on a [`TensorGrid`].
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction<T> {
    grid: TensorGrid<T>,
    values: Vec<T>,
}

impl<T: Real> GridFunction<T> {
    pub fn new(grid: TensorGrid<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(usage(format!("expected {} samples, got {}", grid.len(), values.len())));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn<F: Fn(&[T]) -> T>(grid: TensorGrid<T>, f: F) -> Self {
        let values = (0..grid.len()).map(|i| f(&grid.point(i))).collect();
        Self { grid, values }
    }

    pub fn try_from_fn<F: Fn(&[T]) -> Result<T>>(grid: TensorGrid<T>, f: F) -> Result<Self> {
        let values = (0..grid.len()).map(|i| f(&grid.point(i))).collect::<Result<Vec<_>>>()?;
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &TensorGrid<T> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn with_values(&self, values: Vec<T>) -> Result<Self> {
        Self::new(self.grid.clone(), values)
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self { grid: self.grid.clone(), values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn integral(&self) -> Result<T> {
        self.grid.integrate(&self.values)
    }

    /// `⟨f, g⟩` by quadrature.
    pub fn inner(&self, other: &Self) -> Result<T> {
        if self.values.len() != other.values.len() {
            return Err(usage("inner product of functions on different grids"));
        }
        let prod: Vec<T> = self.values.iter().zip(&other.values).map(|(&a, &b)| a * b).collect();
        self.grid.integrate(&prod)
    }

    pub fn sup_norm(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn sup_distance(&self, other: &Self) -> T {
        self.values.iter().zip(&other.values).fold(T::zero(), |m, (a, b)| m.max((*a - *b).abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn axis() -> AxisGrid<f64> {
        AxisGrid::quadrature(&AxisSpec::default()).unwrap()
    }

    #[test]
    fn integrates_gaussian_on_half_line() {
        let g = axis();
        let vals: Vec<f64> = g.nodes().iter().map(|x| (-x * x).exp()).collect();
        let want = std::f64::consts::PI.sqrt() / 2.0;
        assert!((g.integrate(&vals).unwrap() - want).abs() < 1e-13);
    }

    #[test]
    fn tail_recovers_integrable_singularity() {
        // ∫_0^∞ x^{-0.8} e^{-x} dx = Γ(0.2)
        let g = axis();
        let vals: Vec<f64> = g.nodes().iter().map(|x| x.powf(-0.8) * (-x).exp()).collect();
        let want = crate::specfun::ln_gamma(0.2_f64).exp();
        let got = g.integrate(&vals).unwrap();
        assert!(((got - want) / want).abs() < 1e-10, "got={got} want={want}");
    }

    #[test]
    fn interpolation_is_accurate_inside_panels() {
        let g = axis();
        let vals: Vec<f64> = g.nodes().iter().map(|x| x.sin() * (-x).exp()).collect();
        for &x in &[1e-6, 0.013, 0.77, 1.0, 3.1, 7.9] {
            let got = g.interpolate(&vals, x).unwrap();
            assert!((got - x.sin() * (-x).exp()).abs() < 1e-12, "x={x}");
        }
    }

    #[test]
    fn fornberg_reproduces_central_differences() {
        let xs = [-2.0, -1.0, 0.0, 1.0, 2.0];
        let w = fornberg_weights(0.0_f64, &xs, 2);
        let d1 = [1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0];
        for (a, b) in w[1].iter().zip(&d1) {
            assert!((a - b).abs() < 1e-14);
        }
        let d2 = [-1.0 / 12.0, 4.0 / 3.0, -5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0];
        for (a, b) in w[2].iter().zip(&d2) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn stencil_derivative_on_uniform_grid() {
        let g = AxisGrid::uniform(0.5_f64, 2.5, 401).unwrap();
        let vals: Vec<f64> = g.nodes().iter().map(|x| x.ln()).collect();
        let d = g.derivative(&vals).unwrap();
        for (x, dv) in g.nodes().iter().zip(&d) {
            assert!((dv - 1.0 / x).abs() < 1e-6);
        }
        assert!(AxisGrid::uniform(1.0_f64, 2.0, 6).unwrap().derivative(&[0.0; 6]).is_err());
    }

    #[test]
    fn panel_derivative_of_a_fractional_power() {
        let g = axis();
        let vals: Vec<f64> = g.nodes().iter().map(|x| x.powf(0.25) * (-x * x / 2.0).exp()).collect();
        let d = g.panel_derivative(&vals).unwrap();
        for (x, dv) in g.nodes().iter().zip(&d) {
            let want = (0.25 / x - x) * x.powf(0.25) * (-x * x / 2.0).exp();
            assert!((dv - want).abs() < 1e-8 * (1.0 + want.abs()), "x={x}");
        }
    }

    #[test]
    fn tensor_integral_is_product_of_axes() {
        let a = AxisGrid::<f64>::quadrature(&AxisSpec::coarse()).unwrap();
        let grid = TensorGrid::repeated(a, 2).unwrap();
        let f = GridFunction::from_fn(grid, |x| (-x[0] * x[0] - 2.0 * x[1] * x[1]).exp());
        let want = std::f64::consts::PI / (4.0 * 2f64.sqrt());
        assert!((f.integral().unwrap() - want).abs() < 1e-10);
    }

    #[test]
    fn map_lines_touches_the_right_axis() {
        let a = AxisGrid::uniform(1.0_f64, 2.0, 3).unwrap();
        let b = AxisGrid::uniform(1.0_f64, 4.0, 4).unwrap();
        let grid = TensorGrid::new(vec![a, b]).unwrap();
        let f = GridFunction::from_fn(grid.clone(), |x| 10.0 * x[0] + x[1]);
        let summed = grid.map_lines(f.values(), 0, |line| Ok(vec![line.iter().sum(); line.len()])).unwrap();
        // sum over x0 ∈ {1, 1.5, 2} of 10 x0 + x1 is 45 + 3 x1
        assert_eq!(summed[0], 48.0);
        assert_eq!(summed[3], 57.0);
    }
}
