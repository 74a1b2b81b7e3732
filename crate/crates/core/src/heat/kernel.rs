//! Closed-form heat kernel `p_t^ν` and its derivative kernels.
//!
//! With `r = e^{-4t}` the one-dimensional kernel is evaluated as
//!
//! ```text
//! ln p_t^ν(x,y) = ln 2 - 2t + (ln x + ln y)/2 - ln(1-r)
//!               - coth(2t) (x-y)²/2 - tanh(t) xy + ln(e^{-z} I_ν(z)),
//! z = xy / sinh(2t),
//! ```
//!
//! so no factor `e^z` is ever formed. Every derivative kernel is a short linear
//! combination `Σ c_i(t,x,y) p_t^{ν+s_i}(x,y)` with `s_i ∈ {0,1,2}`, summed in
//! signed-log form.

use crate::error::{domain, usage, Result};
use crate::scalar::{Real, SignedLog};
use crate::specfun::{ln_scaled_unchecked, NuVector};

/// Point query for an `n`-dimensional kernel.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelQuery<T> {
    pub nu: NuVector<T>,
    pub t: T,
    pub x: Vec<T>,
    pub y: Vec<T>,
}

impl<T: Real> KernelQuery<T> {
    pub fn new(nu: NuVector<T>, t: T, x: Vec<T>, y: Vec<T>) -> Result<Self> {
        nu.check_dim(x.len())?;
        nu.check_dim(y.len())?;
        for j in 0..nu.n() {
            check_args(nu.get(j), t, x[j], y[j])?;
        }
        Ok(Self { nu, t, x, y })
    }

    /// `r = e^{-4t}`.
    pub fn r(&self) -> T {
        (-T::lit(4.0) * self.t).exp()
    }
}

/// Which kernel to evaluate. Indices refer to the coordinate acted on;
/// `a` is the damping rate in `δ*_j ∂_t [e^{-at} p_t^{ν+e_j}]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum KernelKind<T> {
    Heat,
    Dt,
    Delta(usize),
    DeltaStar(usize),
    DeltaDt(usize),
    DeltaStarDt { j: usize, a: T },
}

pub(crate) fn check_args<T: Real>(nu: T, t: T, x: T, y: T) -> Result<()> {
    if !(nu > -T::one()) || !nu.is_finite() {
        return Err(domain(format!("kernel order must exceed -1, got {nu}")));
    }
    if !(t > T::zero()) || !t.is_finite() {
        return Err(domain(format!("kernel time must be positive, got {t}")));
    }
    if !(x > T::zero()) || !(y > T::zero()) || !x.is_finite() || !y.is_finite() {
        return Err(domain(format!("kernel arguments must be positive, got x={x}, y={y}")));
    }
    Ok(())
}

/// Time-only coefficients of the kernel formulas.
#[derive(Clone, Copy, Debug)]
struct TimeCoeffs<T> {
    /// `2√r/(1-r) = 1/sinh 2t`
    a: T,
    /// `2r/(1-r) = coth 2t - 1`
    b: T,
    /// `2/(1-r) = coth 2t + 1`
    d: T,
    /// `(1+r)/(1-r)`
    coth: T,
    /// `d/dt` of `a`
    a_dot: T,
    /// `d/dt` of `b` (and of `d`)
    b_dot: T,
    r: T,
    sqrt_r: T,
    omr: T,
}

impl<T: Real> TimeCoeffs<T> {
    fn new(t: T) -> Self {
        let four = T::lit(4.0);
        let two = T::lit(2.0);
        let r = (-four * t).exp();
        let sqrt_r = (-two * t).exp();
        let omr = -(-four * t).exp_m1();
        let omr2 = omr * omr;
        Self {
            a: two * sqrt_r / omr,
            b: two * r / omr,
            d: two / omr,
            coth: (T::one() + r) / omr,
            a_dot: -four * sqrt_r * (T::one() + r) / omr2,
            b_dot: -T::lit(8.0) * r / omr2,
            r,
            sqrt_r,
            omr,
        }
    }
}

/// `ln p_t^μ(x,y)` without argument checks.
pub(crate) fn ln_p_unchecked<T: Real>(mu: T, t: T, x: T, y: T) -> T {
    let two = T::lit(2.0);
    let half = T::lit(0.5);
    let omr = -(-T::lit(4.0) * t).exp_m1();
    let ln_omr = omr.ln();
    let (lx, ly) = (x.ln(), y.ln());
    let coth = (T::one() + (-T::lit(4.0) * t).exp()) / omr;
    let ln_z = lx + ly + T::LN_2() - two * t - ln_omr;
    let z = ln_z.exp();
    let diff = x - y;
    T::LN_2() - two * t + half * (lx + ly) - ln_omr - half * coth * diff * diff - t.tanh() * x * y
        + ln_scaled_unchecked(mu, z, ln_z)
}

/// Coefficients of `∂_t p^{ν+s}` as terms on shifts `s` and `s+1`.
fn dt_terms<T: Real>(nu: T, s: u32, c: &TimeCoeffs<T>, x: T, y: T, scale: T, out: &mut Vec<(T, u32)>) {
    let mu = nu + T::lit(s as f64);
    let omr2 = c.omr * c.omr;
    let c1 = -T::lit(2.0) * (mu + T::one()) * c.coth + T::lit(4.0) * c.r * (x * x + y * y) / omr2;
    let c2 = -T::lit(4.0) * c.sqrt_r * (T::one() + c.r) * x * y / omr2;
    out.push((scale * c1, s));
    out.push((scale * c2, s + 1));
}

/// One-dimensional building blocks, as linear combinations of `p^{ν+s}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum Block {
    Heat,
    Dt,
    Delta,
    DeltaStar,
    DeltaDt,
    /// `∂_t δ* p^{ν+1}` (no damping)
    DeltaStarDt,
}

fn block_terms<T: Real>(block: Block, nu: T, t: T, x: T, y: T) -> Vec<(T, u32)> {
    let c = TimeCoeffs::new(t);
    let mut out = Vec::with_capacity(6);
    match block {
        Block::Heat => out.push((T::one(), 0)),
        Block::Dt => dt_terms(nu, 0, &c, x, y, T::one(), &mut out),
        Block::Delta => {
            out.push((c.a * y, 1));
            out.push((-c.b * x, 0));
        }
        Block::DeltaStar => {
            out.push((c.d * x, 1));
            out.push((-c.a * y, 0));
        }
        Block::DeltaDt => {
            out.push((c.a_dot * y, 1));
            dt_terms(nu, 1, &c, x, y, c.a * y, &mut out);
            out.push((-c.b_dot * x, 0));
            dt_terms(nu, 0, &c, x, y, -c.b * x, &mut out);
        }
        Block::DeltaStarDt => {
            out.push((c.b_dot * x, 1));
            dt_terms(nu, 1, &c, x, y, c.d * x, &mut out);
            out.push((-c.a_dot * y, 0));
            dt_terms(nu, 0, &c, x, y, -c.a * y, &mut out);
        }
    }
    out
}

/// Evaluates a block in signed-log form; `ln p` is computed once per order.
pub(crate) fn block_log<T: Real>(block: Block, nu: T, t: T, x: T, y: T) -> SignedLog<T> {
    let terms = block_terms(block, nu, t, x, y);
    let mut ln_p: [Option<T>; 3] = [None; 3];
    let logs: Vec<SignedLog<T>> = terms
        .iter()
        .map(|&(coef, s)| {
            let lp = *ln_p[s as usize].get_or_insert_with(|| ln_p_unchecked(nu + T::lit(s as f64), t, x, y));
            SignedLog::positive(lp).scale(coef)
        })
        .collect();
    SignedLog::sum(&logs)
}

fn time_derivative_of(block: Block) -> Result<Block> {
    match block {
        Block::Heat => Ok(Block::Dt),
        Block::Delta => Ok(Block::DeltaDt),
        Block::DeltaStar => Ok(Block::DeltaStarDt),
        _ => Err(usage("second time derivatives are not closed-form blocks")),
    }
}

/// Spatial factor per axis and whether `∂_t` (with damping `a`) is applied.
fn plan<T: Real>(kind: KernelKind<T>, n: usize) -> Result<(Vec<Block>, Option<T>)> {
    let acts_on = |j: usize| -> Result<usize> {
        if j >= n {
            return Err(usage(format!("coordinate {j} out of range for dimension {n}")));
        }
        Ok(j)
    };
    let mut blocks = vec![Block::Heat; n];
    let dt = match kind {
        KernelKind::Heat => None,
        KernelKind::Dt => Some(T::zero()),
        KernelKind::Delta(j) => {
            blocks[acts_on(j)?] = Block::Delta;
            None
        }
        KernelKind::DeltaStar(j) => {
            blocks[acts_on(j)?] = Block::DeltaStar;
            None
        }
        KernelKind::DeltaDt(j) => {
            blocks[acts_on(j)?] = Block::Delta;
            Some(T::zero())
        }
        KernelKind::DeltaStarDt { j, a } => {
            blocks[acts_on(j)?] = Block::DeltaStar;
            Some(a)
        }
    };
    Ok((blocks, dt))
}

/// Any kernel of [`KernelKind`] in `n` dimensions, in signed-log form.
///
/// `δ*_j` kernels act on `p^{ν+e_j}`; time derivatives are distributed over
/// the product by the Leibniz rule and `∂_t[e^{-at}P] = e^{-at}(∂_t P - aP)`.
pub fn kernel_log<T: Real>(kind: KernelKind<T>, q: &KernelQuery<T>) -> Result<SignedLog<T>> {
    let n = q.nu.n();
    let (blocks, dt) = plan(kind, n)?;
    let factor = |j: usize, b: Block| block_log(b, q.nu.get(j), q.t, q.x[j], q.y[j]);
    let base: Vec<SignedLog<T>> = (0..n).map(|j| factor(j, blocks[j])).collect();
    let product = |vals: &[SignedLog<T>]| vals.iter().fold(SignedLog::positive(T::zero()), |acc, v| acc.mul(*v));
    let Some(a) = dt else {
        return Ok(product(&base));
    };
    let mut terms = Vec::with_capacity(n + 1);
    for j in 0..n {
        let mut vals = base.clone();
        vals[j] = factor(j, time_derivative_of(blocks[j])?);
        terms.push(product(&vals));
    }
    if a != T::zero() {
        terms.push(product(&base).scale(-a));
    }
    Ok(SignedLog::sum(&terms).scale_ln(-a * q.t))
}

/// One-dimensional convenience wrapper around [`kernel_log`].
pub fn kernel_1d_log<T: Real>(kind: KernelKind<T>, nu: T, t: T, x: T, y: T) -> Result<SignedLog<T>> {
    check_args(nu, t, x, y)?;
    let q = KernelQuery { nu: NuVector::scalar(nu)?, t, x: vec![x], y: vec![y] };
    kernel_log(kind, &q)
}

/// `ln p_t^ν(x,y)`; finite wherever the kernel itself underflows.
pub fn ln_heat_kernel_1d<T: Real>(nu: T, t: T, x: T, y: T) -> Result<T> {
    check_args(nu, t, x, y)?;
    Ok(ln_p_unchecked(nu, t, x, y))
}

/// Heat kernel `p_t^ν(x,y)` of `e^{-t L_ν}` on `(0, ∞)`.
pub fn heat_kernel_1d<T: Real>(nu: T, t: T, x: T, y: T) -> Result<T> {
    Ok(ln_heat_kernel_1d(nu, t, x, y)?.exp())
}

/// `p_t^ν(x,y) = Π_j p_t^{ν_j}(x_j, y_j)`.
pub fn heat_kernel_nd<T: Real>(q: &KernelQuery<T>) -> Result<T> {
    Ok(kernel_log(KernelKind::Heat, q)?.value())
}

/// `δ_x p_t^ν(x,y)` with `δ = ∂_x + x - (ν+1/2)/x`.
pub fn delta_heat_kernel_1d<T: Real>(nu: T, t: T, x: T, y: T) -> Result<T> {
    Ok(kernel_1d_log(KernelKind::Delta(0), nu, t, x, y)?.value())
}

/// `δ*_x p_t^{ν+1}(x,y)` with `δ* = -∂_x + x - (ν+1/2)/x`.
pub fn delta_star_heat_kernel_1d<T: Real>(nu: T, t: T, x: T, y: T) -> Result<T> {
    Ok(kernel_1d_log(KernelKind::DeltaStar(0), nu, t, x, y)?.value())
}

/// `∂_t p_t^ν(x,y)`.
pub fn dt_heat_kernel_1d<T: Real>(nu: T, t: T, x: T, y: T) -> Result<T> {
    Ok(kernel_1d_log(KernelKind::Dt, nu, t, x, y)?.value())
}

/// `δ_x ∂_t p_t^ν(x,y)`.
pub fn delta_dt_heat_kernel_1d<T: Real>(nu: T, t: T, x: T, y: T) -> Result<T> {
    Ok(kernel_1d_log(KernelKind::DeltaDt(0), nu, t, x, y)?.value())
}

/// `δ*_x ∂_t [e^{-at} p_t^{ν+1}(x,y)]`.
pub fn delta_star_dt_heat_kernel_1d<T: Real>(nu: T, a: T, t: T, x: T, y: T) -> Result<T> {
    Ok(kernel_1d_log(KernelKind::DeltaStarDt { j: 0, a }, nu, t, x, y)?.value())
}

/// `∂_t^2 p_t^ν(x,y) = ∫ ∂_s p_{t/2}(x,z) ∂_s p_{t/2}(z,y) dz`, the square of
/// the half-time generator kernel, by quadrature in `z`.
pub fn dt2_heat_kernel_1d<T: Real>(nu: T, t: T, x: T, y: T) -> Result<T> {
    check_args(nu, t, x, y)?;
    let h = t * T::lit(0.5);
    let width = (h.sqrt() * T::lit(0.5)).min(T::lit(0.25));
    let upper = x.max(y) + T::lit(12.0) * t.sqrt() + T::lit(8.0);
    let mut breaks = Vec::new();
    let mut b = 1e-14_f64;
    while b < 1.0 {
        breaks.push(b);
        b *= 2.0;
    }
    let mut b = T::one();
    while b < upper {
        breaks.push(b.as_f64());
        b = b + width;
    }
    breaks.push(b.as_f64());
    let grid = crate::grid::AxisGrid::<T>::from_breakpoints(&breaks, 16)?;
    let vals: Vec<T> = grid
        .nodes()
        .iter()
        .map(|&z| {
            block_log(Block::Dt, nu, h, x, z).mul(block_log(Block::Dt, nu, h, z, y)).value()
        })
        .collect();
    grid.integrate(&vals)
}
