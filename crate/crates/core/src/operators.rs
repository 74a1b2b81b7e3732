//! Operators on sampled functions: the semigroup by kernel quadrature, maximal
//! functions, Riesz transforms and square functions by time subordination,
//! weighted norms and empirical norm probes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, usage, Result};
use crate::grid::{AxisGrid, AxisSpec, GridFunction, TensorGrid};
use crate::heat::{block_log, Block};
use crate::quadrature::TimeQuadrature;
use crate::scalar::Real;
use crate::spectral::{default_degree, eigenvalue, expand, synthesize};
use crate::specfun::{laguerre_function, MultiIndex, NuVector};

/// Gauss–Legendre order of the `y`-integration panels.
const RULE_ORDER: usize = 16;
/// Half-width of the integration window in units of the kernel scale.
const WINDOW: f64 = 18.0;
/// Below the input grid the `y`-rule continues geometrically (ratio 8) over
/// this many decades before the power-law tail takes over.
const BELOW_GRID: f64 = 1e-8;

/// Time rule the quadrature-route operators expect: `[1e-5, 50]`, 80 nodes.
pub const TIME_MIN: f64 = 1e-5;
pub const TIME_MAX: f64 = 50.0;
pub const TIME_NODES: usize = 80;

pub fn default_time_quadrature<T: Real>() -> TimeQuadrature<T> {
    TimeQuadrature::log_spaced(T::lit(TIME_MIN), T::lit(TIME_MAX), TIME_NODES).expect("valid default time rule")
}

/// Axis for operator evaluations: panels from `1e-4` to `10`.
pub fn operator_axis_spec() -> AxisSpec {
    AxisSpec { x_min: 1e-4, x_switch: 1.0, x_max: 10.0, log_ratio: 2.0, linear_width: 0.5, order: 16 }
}

fn breakpoints<T: Real>(axis: &AxisGrid<T>) -> Result<Vec<f64>> {
    let panels = axis.panels();
    if panels.is_empty() {
        return Err(usage("kernel quadrature needs a panel grid"));
    }
    let mut b: Vec<f64> = panels.iter().map(|p| p.a.as_f64()).collect();
    b.push(panels[panels.len() - 1].b.as_f64());
    Ok(b)
}

/// Panel rule for `∫_lo^hi` that contains every breakpoint of the input axis
/// and no panel wider than `width`.
fn refined_rule<T: Real>(breaks: &[f64], lo: f64, hi: f64, width: f64) -> Result<Option<AxisGrid<T>>> {
    if !(hi > lo) {
        return Ok(None);
    }
    let mut coarse = Vec::new();
    if lo == breaks[0] {
        let mut b = lo * BELOW_GRID;
        while b < lo / 1.5 {
            coarse.push(b);
            b *= 8.0;
        }
    }
    coarse.push(lo);
    coarse.extend(breaks.iter().copied().filter(|&b| b > lo && b < hi));
    coarse.push(hi);
    let mut fine = Vec::with_capacity(coarse.len());
    for w in coarse.windows(2) {
        let pieces = ((w[1] - w[0]) / width).ceil().max(1.0) as usize;
        let h = (w[1] - w[0]) / pieces as f64;
        fine.extend((0..pieces).map(|i| w[0] + h * i as f64));
    }
    fine.push(hi);
    fine.dedup();
    Ok(Some(AxisGrid::from_breakpoints(&fine, RULE_ORDER)?))
}

/// `∫ K(x_i, y) f(y) dy` at every node `x_i` of `axis`, where `K` is
/// concentrated within a few multiples of `scale` around the diagonal.
///
/// `f` is represented by its panel interpolant (a power law below the grid);
/// the `y`-rule is refined to the kernel scale inside the window
/// `|x - y| <= 18 scale`. When the window reaches the first panel the rule is
/// continued geometrically toward the origin and closed by a power-law tail.
fn apply_axis_kernel<T, K>(axis: &AxisGrid<T>, values: &[T], scale: T, kern: K) -> Result<Vec<T>>
where
    T: Real,
    K: Fn(T, T) -> T + Sync,
{
    let breaks = breakpoints(axis)?;
    let (first, last) = (breaks[0], breaks[breaks.len() - 1]);
    let s = scale.as_f64();
    axis.nodes()
        .par_iter()
        .map(|&x| -> Result<T> {
            let xf = x.as_f64();
            let lo = (xf - WINDOW * s).max(first);
            let hi = (xf + WINDOW * s).min(last);
            let Some(rule) = refined_rule::<T>(&breaks, lo, hi, 0.5 * s)? else { return Ok(T::zero()) };
            let mut vals = Vec::with_capacity(rule.len());
            for &y in rule.nodes() {
                vals.push(kern(x, y) * axis.interpolate(values, y)?);
            }
            if lo == first {
                rule.integrate(&vals)
            } else {
                let w = rule.weights().expect("panel rule has weights");
                Ok(vals.iter().zip(w).map(|(&v, &wi)| v * wi).sum())
            }
        })
        .collect()
}

/// Applies a per-axis kernel along every axis of a tensor grid.
fn apply_product<T, F>(f: &GridFunction<T>, per_axis: F) -> Result<GridFunction<T>>
where
    T: Real,
    F: Fn(usize, &AxisGrid<T>, &[T]) -> Result<Vec<T>>,
{
    let grid = f.grid();
    let mut cur = f.values().to_vec();
    for j in 0..grid.n() {
        let axis = grid.axis(j);
        cur = grid.map_lines(&cur, j, |line| per_axis(j, axis, line))?;
    }
    f.with_values(cur)
}

fn check_time<T: Real>(t: T) -> Result<()> {
    if !(t > T::zero()) || !t.is_finite() {
        return Err(domain(format!("semigroup time must be positive, got {t}")));
    }
    Ok(())
}

/// `e^{-tL_ν} f(x) = ∫ p_t^ν(x,y) f(y) dy` by kernel quadrature.
pub fn semigroup_apply_kernel<T: Real>(f: &GridFunction<T>, nu: &NuVector<T>, t: T) -> Result<GridFunction<T>> {
    nu.check_dim(f.grid().n())?;
    check_time(t)?;
    apply_product(f, |j, axis, line| {
        let v = nu.get(j);
        apply_axis_kernel(axis, line, t.sqrt(), |x, y| block_log(Block::Heat, v, t, x, y).value())
    })
}

/// `δ_j e^{-tL_ν} f` with the kernel `δ_{j,x} p_t^ν(x,y)`.
pub fn delta_semigroup_apply_kernel<T: Real>(f: &GridFunction<T>, nu: &NuVector<T>, j: usize, t: T) -> Result<GridFunction<T>> {
    nu.check_dim(f.grid().n())?;
    if j >= nu.n() {
        return Err(usage(format!("coordinate {j} out of range for dimension {}", nu.n())));
    }
    check_time(t)?;
    apply_product(f, |i, axis, line| {
        let v = nu.get(i);
        let block = if i == j { Block::Delta } else { Block::Heat };
        apply_axis_kernel(axis, line, t.sqrt(), |x, y| block_log(block, v, t, x, y).value())
    })
}

/// `sup_t |e^{-tL_ν} f|` over the nodes of `tq`, together with `|f|` itself
/// (the limit `t → 0`).
pub fn maximal_semigroup<T: Real>(f: &GridFunction<T>, nu: &NuVector<T>, tq: &TimeQuadrature<T>) -> Result<GridFunction<T>> {
    maximal_semigroup_at(f, nu, tq.nodes())
}

/// [`maximal_semigroup`] over an explicit list of times.
pub fn maximal_semigroup_at<T: Real>(f: &GridFunction<T>, nu: &NuVector<T>, times: &[T]) -> Result<GridFunction<T>> {
    if times.is_empty() {
        return Err(usage("maximal function needs at least one time node"));
    }
    let mut out: Vec<T> = f.values().iter().map(|v| v.abs()).collect();
    for &t in times {
        let u = semigroup_apply_kernel(f, nu, t)?;
        for (o, v) in out.iter_mut().zip(u.values()) {
            *o = o.max(v.abs());
        }
    }
    f.with_values(out)
}

fn require_1d<T: Real>(f: &GridFunction<T>, what: &str) -> Result<()> {
    if f.grid().n() != 1 {
        return Err(usage(format!("{what} is implemented for n = 1 only")));
    }
    Ok(())
}

/// `(1/t^{1/2}) ∫ exp(-(x-y)²/(ct)) |f(y)| dy`.
pub fn gaussian_average<T: Real>(f: &GridFunction<T>, c: T, t: T) -> Result<GridFunction<T>> {
    check_time(t)?;
    if !(c > T::zero()) {
        return Err(domain("Gaussian constant must be positive"));
    }
    let abs = f.map(|v| v.abs());
    apply_product(&abs, |_, axis, line| {
        apply_axis_kernel(axis, line, (c * t).sqrt(), |x, y| {
            let d = x - y;
            (-d * d / (c * t)).exp() / t.sqrt()
        })
    })
}

/// Discrete Hardy–Littlewood maximal function
/// `sup_{I ∋ x} ((1/|I|) ∫_I |f|^r)^{1/r}` over intervals whose endpoints are
/// panel breakpoints of the grid.
pub fn hl_maximal<T: Real>(f: &GridFunction<T>, r: T) -> Result<GridFunction<T>> {
    if !(r >= T::one()) || !r.is_finite() {
        return Err(domain(format!("maximal exponent must satisfy r >= 1, got {r}")));
    }
    require_1d(f, "the Hardy–Littlewood maximal function")?;
    let axis = f.grid().axis(0);
    let panels = axis.panels();
    if panels.is_empty() {
        return Err(usage("maximal function needs a panel grid"));
    }
    let w = axis.weights().expect("panel grid has weights");
    let powered: Vec<T> = f.values().iter().map(|v| v.abs().powf(r)).collect();
    // prefix[k] = ∫ from the first breakpoint to breakpoint k
    let mut prefix = vec![T::zero(); panels.len() + 1];
    let mut ends = Vec::with_capacity(panels.len() + 1);
    ends.push(panels[0].a);
    for (k, p) in panels.iter().enumerate() {
        let s: T = (p.start..p.start + p.len).map(|i| powered[i] * w[i]).sum();
        prefix[k + 1] = prefix[k] + s;
        ends.push(p.b);
    }
    let m = panels.len();
    // best[k]: sup over intervals [e_a, e_b] with a <= k < b
    let best: Vec<T> = (0..m)
        .into_par_iter()
        .map(|k| {
            let mut best = T::zero();
            for a in 0..=k {
                for b in k + 1..=m {
                    let avg = (prefix[b] - prefix[a]) / (ends[b] - ends[a]);
                    best = best.max(avg);
                }
            }
            best.powf(r.recip())
        })
        .collect();
    let mut out = vec![T::zero(); axis.len()];
    for (k, p) in panels.iter().enumerate() {
        for o in &mut out[p.start..p.start + p.len] {
            *o = best[k];
        }
    }
    f.with_values(out)
}

/// The power-law parts of the maximal-function decomposition for
/// `γ = γ_ν`: `T_2 f(x) = ∫_0^{x/2} x^{-1} (x/y)^γ |f(y)| dy` and
/// `T_3 f(x) = ∫_{x/2}^∞ y^{-1} (y/x)^γ |f(y)| dy`.
pub fn tail_operators<T: Real>(f: &GridFunction<T>, gamma: T) -> Result<(GridFunction<T>, GridFunction<T>)> {
    require_1d(f, "the tail operators")?;
    if !(gamma >= T::zero() && gamma < T::one()) {
        return Err(domain(format!("tail exponent must lie in [0, 1), got {gamma}")));
    }
    let axis = f.grid().axis(0);
    let breaks = breakpoints(axis)?;
    let (first, last) = (breaks[0], breaks[breaks.len() - 1]);
    let abs: Vec<T> = f.values().iter().map(|v| v.abs()).collect();
    let pieces: Vec<(T, T)> = axis
        .nodes()
        .par_iter()
        .map(|&x| -> Result<(T, T)> {
            let half = (x / T::lit(2.0)).as_f64();
            let width = (last - first) / 64.0;
            let mut t2 = T::zero();
            if let Some(rule) = refined_rule::<T>(&breaks, first, half.min(last), width)? {
                let vals = rule
                    .nodes()
                    .iter()
                    .map(|&y| Ok((x / y).powf(gamma) / x * axis.interpolate(&abs, y)?))
                    .collect::<Result<Vec<T>>>()?;
                t2 = rule.integrate(&vals)?;
            } else if half > 0.0 {
                // x/2 below the first node: power law only
                t2 = T::zero();
            }
            let mut t3 = T::zero();
            let from = half.max(first);
            if let Some(rule) = refined_rule::<T>(&breaks, from, last, width)? {
                let vals = rule
                    .nodes()
                    .iter()
                    .map(|&y| Ok((y / x).powf(gamma) / y * axis.interpolate(&abs, y)?))
                    .collect::<Result<Vec<T>>>()?;
                t3 = if from == first {
                    rule.integrate(&vals)?
                } else {
                    let w = rule.weights().expect("panel rule has weights");
                    vals.iter().zip(w).map(|(&v, &wi)| v * wi).sum()
                };
            }
            Ok((t2, t3))
        })
        .collect::<Result<Vec<_>>>()?;
    let (t2, t3): (Vec<T>, Vec<T>) = pieces.into_iter().unzip();
    Ok((f.with_values(t2)?, f.with_values(t3)?))
}

/// Output of a time-subordination operator.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeIntegral<T> {
    pub values: GridFunction<T>,
    /// largest contribution of the extrapolated part below `t_min`
    pub head: T,
    /// bound for the omitted part above `t_max`
    pub tail_estimate: T,
    /// set when the time rule does not cover `[1e-5, 50]` with 80 nodes
    pub warning: Option<String>,
}

fn time_rule_warning<T: Real>(tq: &TimeQuadrature<T>) -> Option<String> {
    let tol = 1e-9;
    if tq.t_min().as_f64() > TIME_MIN * (1.0 + tol) || tq.t_max().as_f64() < TIME_MAX * (1.0 - tol) || tq.len() < TIME_NODES {
        Some(format!(
            "time rule [{}, {}] with {} nodes does not cover [{TIME_MIN}, {TIME_MAX}] with {TIME_NODES} nodes",
            tq.t_min(),
            tq.t_max(),
            tq.len()
        ))
    } else {
        None
    }
}

/// Smallest eigenvalue `2(ν_1+…+ν_n) + 2n`, the decay rate of the semigroup.
fn ground_eigenvalue<T: Real>(nu: &NuVector<T>) -> T {
    eigenvalue(&MultiIndex::zero(nu.n()), nu).expect("matching dimension")
}

/// Assembles `∫ g(t, x) dt/t` from samples `g(t_i, ·)`, with a head for
/// `g ~ t^a` as `t → 0` and a tail bound for `g ~ e^{-λt}` as `t → ∞`.
fn assemble_time_integral<T: Real>(
    f: &GridFunction<T>,
    tq: &TimeQuadrature<T>,
    samples: &[Vec<T>],
    a: T,
    decay: T,
) -> Result<TimeIntegral<T>> {
    let len = f.values().len();
    let mut out = vec![T::zero(); len];
    for (row, &w) in samples.iter().zip(tq.weights()) {
        for (o, &v) in out.iter_mut().zip(row) {
            *o = *o + w * v;
        }
    }
    let mut head = T::zero();
    for (o, &v) in out.iter_mut().zip(&samples[0]) {
        let h = tq.head(v, a);
        head = head.max(h.abs());
        *o = *o + h;
    }
    let t_max = tq.t_max();
    let last = &samples[samples.len() - 1];
    let tail_estimate = last.iter().fold(T::zero(), |m, v| m.max(v.abs())) / (decay * t_max);
    Ok(TimeIntegral { values: f.with_values(out)?, head, tail_estimate, warning: time_rule_warning(tq) })
}

/// `R^j_ν f = (1/√π) ∫_0^∞ t^{-1/2} δ_j e^{-tL_ν} f dt`, trapezoidal in `ln t`.
pub fn riesz_apply_quadrature<T: Real>(f: &GridFunction<T>, nu: &NuVector<T>, j: usize, tq: &TimeQuadrature<T>) -> Result<TimeIntegral<T>> {
    let c = T::PI().sqrt().recip();
    let samples = tq
        .nodes()
        .iter()
        .map(|&t| Ok(delta_semigroup_apply_kernel(f, nu, j, t)?.values().iter().map(|&v| c * t.sqrt() * v).collect()))
        .collect::<Result<Vec<Vec<T>>>>()?;
    assemble_time_integral(f, tq, &samples, T::lit(0.5), ground_eigenvalue(nu))
}

/// `S^j f = (∫_0^∞ |√t δ_j e^{-tL_ν} f|² dt/t)^{1/2}`.
pub fn square_s<T: Real>(f: &GridFunction<T>, nu: &NuVector<T>, j: usize, tq: &TimeQuadrature<T>) -> Result<TimeIntegral<T>> {
    let samples = tq
        .nodes()
        .iter()
        .map(|&t| Ok(delta_semigroup_apply_kernel(f, nu, j, t)?.values().iter().map(|&v| t * v * v).collect()))
        .collect::<Result<Vec<Vec<T>>>>()?;
    let mut r = assemble_time_integral(f, tq, &samples, T::one(), T::lit(2.0) * ground_eigenvalue(nu))?;
    r.values = r.values.map(|v| v.max(T::zero()).sqrt());
    Ok(r)
}

/// `G f = (∫_0^∞ |tL_ν e^{-tL_ν} f|² dt/t)^{1/2}`, with `tL e^{-tL}` applied
/// through the eigen-expansion of `f` (weights `tλ e^{-tλ}`).
pub fn square_g<T: Real>(f: &GridFunction<T>, nu: &NuVector<T>, tq: &TimeQuadrature<T>) -> Result<TimeIntegral<T>> {
    let c = expand(f, nu, default_degree(nu.n()))?;
    let samples = tq
        .nodes()
        .iter()
        .map(|&t| {
            let g = synthesize(&c.apply_multiplier(|_, lambda| t * lambda * (-t * lambda).exp())?, f.grid())?;
            Ok(g.values().iter().map(|&v| v * v).collect())
        })
        .collect::<Result<Vec<Vec<T>>>>()?;
    let mut r = assemble_time_integral(f, tq, &samples, T::lit(2.0), T::lit(2.0) * ground_eigenvalue(nu))?;
    r.values = r.values.map(|v| v.max(T::zero()).sqrt());
    Ok(r)
}

/// `(∫ |f|^p w)^{1/p}` by quadrature.
pub fn weighted_lp_norm<T: Real>(f: &GridFunction<T>, p: T, w: &[T]) -> Result<T> {
    if !(p > T::zero()) || !p.is_finite() {
        return Err(domain(format!("Lebesgue exponent must lie in (0, ∞), got {p}")));
    }
    if w.len() != f.values().len() {
        return Err(usage(format!("weight has {} values, grid has {}", w.len(), f.values().len())));
    }
    if let Some(bad) = w.iter().find(|v| !(**v > T::zero())) {
        return Err(domain(format!("weights must be positive, got {bad}")));
    }
    let vals: Vec<T> = f.values().iter().zip(w).map(|(&v, &wi)| v.abs().powf(p) * wi).collect();
    Ok(f.grid().integrate(&vals)?.max(T::zero()).powf(p.recip()))
}

/// Named test input of a norm probe.
#[derive(Clone, Debug)]
pub struct ProbeInput<T> {
    pub name: String,
    pub f: GridFunction<T>,
}

/// Ten eigenfunctions, five log-normal bumps and five indicators of
/// intervals; the random parameters come from a seeded ChaCha stream.
/// In `n` dimensions each input is the product of the same profile per axis.
pub fn probe_family<T: Real>(nu: &NuVector<T>, grid: &TensorGrid<T>, seed: u64) -> Result<Vec<ProbeInput<T>>> {
    nu.check_dim(grid.n())?;
    let mut out = Vec::with_capacity(20);
    for k in 0..10 {
        let f = GridFunction::try_from_fn(grid.clone(), |x| {
            crate::specfun::laguerre_function_nd(&MultiIndex::new(vec![k; x.len()]), nu, x)
        })?;
        out.push(ProbeInput { name: format!("phi{k}"), f });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..5 {
        let mu: f64 = rng.gen_range((0.01f64).ln()..(4.0f64).ln());
        let s: f64 = rng.gen_range(0.2..0.8);
        let f = GridFunction::from_fn(grid.clone(), |x| {
            x.iter().map(|&v| (-(v.as_f64().ln() - mu).powi(2) / (2.0 * s * s)).exp()).fold(T::one(), |a, b| a * T::lit(b))
        });
        out.push(ProbeInput { name: format!("bump{i}[mu={:.4},s={:.4}]", mu.exp(), s), f });
    }
    for i in 0..5 {
        let a: f64 = rng.gen_range((0.01f64).ln()..(3.0f64).ln()).exp();
        let b = a * rng.gen_range(1.5..3.0);
        let f = GridFunction::from_fn(grid.clone(), |x| {
            if x.iter().all(|&v| v.as_f64() >= a && v.as_f64() <= b) {
                T::one()
            } else {
                T::zero()
            }
        });
        out.push(ProbeInput { name: format!("indicator{i}[{a:.4},{b:.4}]"), f });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeRatio {
    pub name: String,
    pub ratio: f64,
}

/// Empirical lower bound for an operator norm on `L^p_w`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub p: f64,
    pub ratios: Vec<ProbeRatio>,
    pub max_ratio: f64,
    pub argmax: String,
}

/// `max_f ‖Tf‖_{p,w} / ‖f‖_{p,w}` over the family; the weight is sampled on
/// the common grid of inputs and outputs.
pub fn op_norm_probe<T, Op>(op: Op, p: T, w: &[T], family: &[ProbeInput<T>]) -> Result<ProbeReport>
where
    T: Real,
    Op: Fn(&GridFunction<T>) -> Result<GridFunction<T>>,
{
    if family.is_empty() {
        return Err(usage("norm probe needs at least one test input"));
    }
    let mut ratios = Vec::with_capacity(family.len());
    for input in family {
        let out = op(&input.f)?;
        let den = weighted_lp_norm(&input.f, p, w)?;
        let num = weighted_lp_norm(&out, p, w)?;
        let ratio = if den > T::zero() { (num / den).as_f64() } else { f64::NAN };
        ratios.push(ProbeRatio { name: input.name.clone(), ratio });
    }
    let (argmax, max_ratio) = ratios
        .iter()
        .filter(|r| r.ratio.is_finite())
        .fold((String::new(), f64::NEG_INFINITY), |acc, r| if r.ratio > acc.1 { (r.name.clone(), r.ratio) } else { acc });
    Ok(ProbeReport { p: p.as_f64(), ratios, max_ratio, argmax })
}

/// Riesz transform through the eigen-expansion, evaluated on the input grid.
pub fn riesz_spectral_on_grid<T: Real>(f: &GridFunction<T>, nu: &NuVector<T>, j: usize) -> Result<GridFunction<T>> {
    let c = expand(f, nu, default_degree(nu.n()))?;
    synthesize(&crate::spectral::riesz_apply_spectral(&c, j)?, f.grid())
}

/// One-dimensional off-diagonal envelope operator
/// `T(x,y) = t^{-1/2} exp(-(x-y)²/(ct)) (1+√t/x)^β (1+√t/y)^σ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OffDiagonalOperator {
    pub beta: f64,
    pub sigma: f64,
    pub c: f64,
    pub t: f64,
}

impl OffDiagonalOperator {
    /// `ln T(x,y) + d²/(ct)` for a reference distance `d`.
    fn ln_shifted(&self, x: f64, y: f64, d: f64) -> f64 {
        let st = self.t.sqrt();
        -0.5 * self.t.ln() - ((x - y).powi(2) - d * d) / (self.c * self.t)
            + self.beta * (st / x).ln_1p()
            + self.sigma * (st / y).ln_1p()
    }
}

/// `‖T‖_{L²(B) → L²(S_j(B))}` for one annulus, in log form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnulusNorm {
    pub j: usize,
    pub ln_norm: f64,
    /// distance between the ball and the annulus
    pub gap: f64,
}

/// Gauss–Legendre nodes and weights on `[a, b]`, geometric near the origin.
fn panel_nodes(a: f64, b: f64, width: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut breaks = Vec::new();
    let mut lo = a;
    if a < width {
        // geometric panels toward the origin resolve the boundary factor
        lo = a.max(1e-10);
        let mut x = width.min(b);
        let mut stack = vec![x];
        while x / 2.0 > lo {
            x /= 2.0;
            stack.push(x);
        }
        stack.push(lo);
        stack.reverse();
        stack.dedup();
        breaks.extend(stack);
        lo = width.min(b);
    } else {
        breaks.push(lo);
    }
    if b > lo {
        let pieces = ((b - lo) / width).ceil().max(1.0) as usize;
        let h = (b - lo) / pieces as f64;
        breaks.extend((1..=pieces).map(|i| lo + h * i as f64));
    }
    breaks.dedup();
    let axis = AxisGrid::<f64>::from_breakpoints(&breaks, RULE_ORDER)?;
    Ok((axis.nodes().to_vec(), axis.weights().expect("weights").to_vec()))
}

/// Largest singular value of the dense matrix `m` (rows × cols), by power
/// iteration on `mᵀm`.
fn top_singular_value(m: &[f64], rows: usize, cols: usize) -> f64 {
    let mut gram = vec![0.0; cols * cols];
    for r in 0..rows {
        let row = &m[r * cols..(r + 1) * cols];
        for a in 0..cols {
            let ra = row[a];
            if ra == 0.0 {
                continue;
            }
            for b in 0..cols {
                gram[a * cols + b] += ra * row[b];
            }
        }
    }
    let mut v = vec![1.0 / (cols as f64).sqrt(); cols];
    let mut lambda = 0.0;
    for _ in 0..500 {
        let mut next = vec![0.0; cols];
        for a in 0..cols {
            next[a] = (0..cols).map(|b| gram[a * cols + b] * v[b]).sum();
        }
        let norm = next.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        let prev = lambda;
        lambda = norm;
        for (vi, ni) in v.iter_mut().zip(&next) {
            *vi = ni / norm;
        }
        if (lambda - prev).abs() <= 1e-13 * lambda {
            break;
        }
    }
    lambda.sqrt()
}

/// Norms of `T` from the ball `[center - radius, center + radius]` to the
/// annuli `S_j = {x > 0 : 2^{j-1} r < |x - center| <= 2^j r}`.
pub fn off_diagonal_norms(op: &OffDiagonalOperator, center: f64, radius: f64, annuli: &[usize]) -> Result<Vec<AnnulusNorm>> {
    if !(radius > 0.0) || !(center - radius > 0.0) {
        return Err(domain("the ball must lie inside (0, ∞)"));
    }
    if !(op.t > 0.0 && op.c > 0.0) {
        return Err(domain("off-diagonal operator needs t > 0 and c > 0"));
    }
    let scale = (op.c * op.t).sqrt();
    let width = (scale / 4.0).min(0.25);
    let (bx, bw) = panel_nodes(center - radius, center + radius, width)?;
    let reach = 9.0 * scale;
    let mut out = Vec::with_capacity(annuli.len());
    for &j in annuli {
        if j < 1 {
            return Err(usage("annulus index must be at least 1"));
        }
        let inner = 2f64.powi(j as i32 - 1) * radius;
        let outer = 2f64.powi(j as i32) * radius;
        let mut pieces = Vec::new();
        // right piece (center + inner, center + outer]
        pieces.push((center + inner, center + outer));
        if center - inner > 0.0 {
            pieces.push(((center - outer).max(0.0), center - inner));
        }
        let gap = pieces
            .iter()
            .map(|&(a, b)| if a >= center + radius { a - (center + radius) } else { (center - radius) - b })
            .fold(f64::INFINITY, f64::min)
            .max(0.0);
        let mut xs = Vec::new();
        let mut xw = Vec::new();
        for &(a, b) in &pieces {
            let near_gap = if a >= center + radius { a - (center + radius) } else { (center - radius) - b };
            if near_gap - gap > reach {
                continue;
            }
            // only the part within reach of the ball matters after the shift
            let (lo, hi) = if a >= center + radius { (a, b.min(a + reach)) } else { (a.max(b - reach), b) };
            let (n, w) = panel_nodes(lo, hi, width)?;
            xs.extend(n);
            xw.extend(w);
        }
        let rows = xs.len();
        let cols = bx.len();
        let mut m = vec![0.0; rows * cols];
        for r in 0..rows {
            for c in 0..cols {
                m[r * cols + c] = xw[r].sqrt() * op.ln_shifted(xs[r], bx[c], gap).exp() * bw[c].sqrt();
            }
        }
        let s = top_singular_value(&m, rows, cols);
        out.push(AnnulusNorm { j, ln_norm: s.ln() - gap * gap / (op.c * op.t), gap });
    }
    Ok(out)
}

/// Decay fit for one candidate `c`: `g_j = ln‖T‖_j + (2^j r)²/(ct)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub c: f64,
    pub ln_constant: f64,
    pub non_increasing: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OffDiagonalReport {
    pub operator: OffDiagonalOperator,
    pub norms: Vec<AnnulusNorm>,
    pub fits: Vec<DecayFit>,
    /// smallest candidate `c` for which `g_j` is non-increasing in `j`
    pub fitted_c: Option<f64>,
    pub pass: bool,
}

/// Measures the annulus norms and fits the Gaussian decay constant.
pub fn off_diagonal_decay(op: &OffDiagonalOperator, center: f64, radius: f64, annuli: &[usize], c_candidates: &[f64]) -> Result<OffDiagonalReport> {
    let norms = off_diagonal_norms(op, center, radius, annuli)?;
    let fits: Vec<DecayFit> = c_candidates
        .iter()
        .map(|&c| {
            let g: Vec<f64> = norms
                .iter()
                .map(|a| a.ln_norm + (2f64.powi(a.j as i32) * radius).powi(2) / (c * op.t))
                .collect();
            let non_increasing = g.windows(2).all(|w| w[1] <= w[0] + 1e-9 * w[0].abs().max(1.0));
            DecayFit { c, ln_constant: g.iter().copied().fold(f64::NEG_INFINITY, f64::max), non_increasing }
        })
        .collect();
    let fitted_c = fits.iter().filter(|f| f.non_increasing && f.ln_constant.is_finite()).map(|f| f.c).reduce(f64::min);
    Ok(OffDiagonalReport { operator: *op, norms, fits, pass: fitted_c.is_some(), fitted_c })
}

/// Single eigenfunction sampled on a grid.
pub fn eigenfunction_on<T: Real>(grid: &TensorGrid<T>, k: usize, nu: T) -> Result<GridFunction<T>> {
    if grid.n() != 1 {
        return Err(usage("eigenfunction_on expects a one-dimensional grid"));
    }
    GridFunction::try_from_fn(grid.clone(), |x| laguerre_function(k, nu, x[0]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn op_grid() -> TensorGrid<f64> {
        TensorGrid::single(AxisGrid::quadrature(&operator_axis_spec()).unwrap())
    }

    fn small_grid() -> TensorGrid<f64> {
        let spec = AxisSpec { x_min: 1e-4, x_switch: 1.0, x_max: 7.0, log_ratio: 4.0, linear_width: 1.0, order: 16 };
        TensorGrid::single(AxisGrid::quadrature(&spec).unwrap())
    }

    fn nu1(v: f64) -> NuVector<f64> {
        NuVector::scalar(v).unwrap()
    }

    #[test]
    fn semigroup_on_eigenfunctions_decays_by_the_eigenvalue() {
        for &nu in &[-0.75, 0.4] {
            for &t in &[0.01, 0.3] {
                let f = eigenfunction_on(&small_grid(), 2, nu).unwrap();
                let u = semigroup_apply_kernel(&f, &nu1(nu), t).unwrap();
                let lambda = 8.0 + 2.0 * nu + 2.0;
                let want = f.map(|v| (-t * lambda).exp() * v);
                let err = u.sup_distance(&want) / want.sup_norm();
                assert!(err < 1e-6, "nu={nu} t={t} err={err}");
            }
        }
    }

    #[test]
    fn maximal_function_basics() {
        let g = small_grid();
        let nu = nu1(-0.75);
        let f = eigenfunction_on(&g, 0, -0.75).unwrap();
        let times = [1e-3, 0.1, 1.0];
        let m = maximal_semigroup_at(&f, &nu, &times).unwrap();
        assert!(m.sup_distance(&f) < 1e-8);
        let ind = GridFunction::from_fn(g.clone(), |x| if (1.0..=2.0).contains(&x[0]) { 1.0 } else { 0.0 });
        let m1 = maximal_semigroup_at(&ind, &nu, &times).unwrap();
        let m2 = maximal_semigroup_at(&ind.map(|v| 2.0 * v), &nu, &times).unwrap();
        assert!(m2.sup_distance(&m1.map(|v| 2.0 * v)) < 1e-14);
        assert!(matches!(maximal_semigroup_at(&ind, &nu, &[]), Err(crate::Error::Usage(_))));
    }

    #[test]
    fn hardy_littlewood_on_an_indicator() {
        let g = op_grid();
        let ind = GridFunction::from_fn(g.clone(), |x| if (1.0..=2.0).contains(&x[0]) { 1.0 } else { 0.0 });
        let m = hl_maximal(&ind, 1.0).unwrap();
        let nodes = g.axis(0).nodes();
        // x in the panel [4, 4.5]: best interval [1, 4.5] up to the breakpoints
        let i = nodes.iter().position(|&x| x > 4.0).unwrap();
        assert!((m.values()[i] - 1.0 / 3.5).abs() < 1e-12, "{}", m.values()[i]);
        let m2 = hl_maximal(&ind, 2.0).unwrap();
        assert!(m2.values().iter().zip(m.values()).all(|(a, b)| a + 1e-15 >= *b));
        let c = GridFunction::from_fn(g.clone(), |_| 3.0);
        assert!(hl_maximal(&c, 1.0).unwrap().values().iter().all(|v| (v - 3.0).abs() < 1e-12));
        assert!(matches!(hl_maximal(&c, 0.5), Err(crate::Error::Domain(_))));
    }

    #[test]
    fn gaussian_averages_are_dominated_by_the_maximal_function() {
        let g = op_grid();
        let ind = GridFunction::from_fn(g.clone(), |x| if (1.0..=2.0).contains(&x[0]) { 1.0 } else { 0.0 });
        let m = hl_maximal(&ind, 1.0).unwrap();
        let mut worst: f64 = 0.0;
        for &t in &[1e-3, 0.01, 0.1, 1.0, 10.0] {
            let a = gaussian_average(&ind, 1.0, t).unwrap();
            for (u, v) in a.values().iter().zip(m.values()) {
                worst = worst.max(u / v);
            }
        }
        // ∫ t^{-1/2} e^{-s²/t} ds = √π bounds the ratio up to the interval family
        assert!(worst.is_finite() && worst < 2.0 * std::f64::consts::PI.sqrt(), "{worst}");
    }

    #[test]
    fn tail_operators_of_an_indicator() {
        let g = small_grid();
        let ind = GridFunction::from_fn(g.clone(), |x| if (1.0..=2.0).contains(&x[0]) { 1.0 } else { 0.0 });
        let (t2, t3) = tail_operators(&ind, 0.25).unwrap();
        for (i, &x) in g.axis(0).nodes().iter().enumerate() {
            let want2 = if x > 2.0 {
                let top = (x / 2.0).min(2.0);
                x.powf(-0.75) * (top.powf(0.75) - 1.0) / 0.75
            } else {
                0.0
            };
            let lo = (x / 2.0).max(1.0);
            let want3 = if lo < 2.0 { x.powf(-0.25) * (2f64.powf(0.25) - lo.powf(0.25)) / 0.25 } else { 0.0 };
            assert!((t2.values()[i] - want2).abs() < 1e-9, "x={x}");
            assert!((t3.values()[i] - want3).abs() < 1e-9, "x={x}");
        }
    }

    #[test]
    fn weighted_norms() {
        let g = op_grid();
        let f = eigenfunction_on(&g, 0, -0.3).unwrap();
        let ones = vec![1.0; g.len()];
        assert!((weighted_lp_norm(&f, 2.0, &ones).unwrap() - 1.0).abs() < 1e-10);
        let ind = GridFunction::from_fn(g.clone(), |x| if (1.0..=2.0).contains(&x[0]) { 1.0 } else { 0.0 });
        let w: Vec<f64> = g.axis(0).nodes().iter().map(|x| x.powf(0.7)).collect();
        let want = ((2f64.powf(1.7) - 1.0) / 1.7).sqrt();
        assert!((weighted_lp_norm(&ind, 2.0, &w).unwrap() - want).abs() < 1e-12);
        let mut bad = ones.clone();
        bad[3] = 0.0;
        assert!(matches!(weighted_lp_norm(&f, 2.0, &bad), Err(crate::Error::Domain(_))));
    }

    #[test]
    fn riesz_routes_agree_on_a_short_time_rule() {
        // coarse rule, so only agreement of the two routes at the 1e-3 level
        let g = small_grid();
        let nu = nu1(-0.5);
        let f = eigenfunction_on(&g, 1, -0.5).unwrap();
        let tq = TimeQuadrature::log_spaced(1e-4, 30.0, 40).unwrap();
        let r = riesz_apply_quadrature(&f, &nu, 0, &tq).unwrap();
        assert!(r.warning.is_some());
        let want = eigenfunction_on(&g, 0, 0.5).unwrap().map(|v| -2.0 / 5f64.sqrt() * v);
        let err = r.values.sup_distance(&want) / want.sup_norm();
        assert!(err < 2e-3, "err={err}");
    }

    #[test]
    fn probe_family_is_deterministic() {
        let g = small_grid();
        let a = probe_family(&nu1(-0.75), &g, 7).unwrap();
        let b = probe_family(&nu1(-0.75), &g, 7).unwrap();
        assert_eq!(a.len(), 20);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.name, y.name);
            assert_eq!(x.f, y.f);
        }
        let id = op_norm_probe(|f| Ok(f.clone()), 2.0, &vec![1.0; g.len()], &a).unwrap();
        assert!((id.max_ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn off_diagonal_norms_decay() {
        let op = OffDiagonalOperator { beta: 0.25, sigma: 0.25, c: 1.0, t: 0.2 };
        let r = off_diagonal_decay(&op, 1.5, 0.5, &[2, 3, 4, 5, 6], &[1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0]).unwrap();
        assert!(r.pass, "{r:?}");
        assert!(r.norms.windows(2).all(|w| w[1].ln_norm < w[0].ln_norm));
        assert!(r.norms.iter().all(|a| a.ln_norm.is_finite()));
    }
}
