//! Muckenhoupt and reverse Hölder classes, the exponents `γ_ν` and the
//! admissible `(p, w)` ranges of the weighted estimates.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, usage, Error, Result};
use crate::grid::{AxisGrid, TensorGrid};
use crate::scalar::Real;
use crate::specfun::NuVector;

/// `γ_ν = max_j max(-1/2 - ν_j, 0)`.
pub fn gamma_nu<T: Real>(nu: &NuVector<T>) -> T {
    nu.gamma_max()
}

/// `γ_{ν+e_j}` (`j` is zero-based).
pub fn gamma_shift<T: Real>(nu: &NuVector<T>, j: usize) -> Result<T> {
    if j >= nu.n() {
        return Err(usage(format!("direction {j} out of range for n = {}", nu.n())));
    }
    Ok(nu.shifted(j).gamma_max())
}

/// Zero-based indices with `ν_j < -1/2`.
pub fn singular_indices<T: Real>(nu: &NuVector<T>) -> Vec<usize> {
    (0..nu.n()).filter(|&j| nu.get(j) < -T::lit(0.5)).collect()
}

/// Hölder conjugate `q/(q-1)`, with `1' = ∞` and `∞' = 1`.
pub fn conjugate<T: Real>(q: T) -> T {
    if q.is_infinite() {
        T::one()
    } else if q == T::one() {
        T::infinity()
    } else {
        q / (q - T::one())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PowerMembership {
    pub in_ap: Option<bool>,
    pub in_rh: Option<bool>,
}

/// Closed-form membership of `|x|^σ` in `A_p` and `RH_q` on an `n`-dimensional
/// domain. Either exponent may be omitted.
pub fn power_weight_class<T: Real>(sigma: T, p: Option<T>, q: Option<T>, n: usize) -> Result<PowerMembership> {
    if n == 0 {
        return Err(usage("dimension must be positive"));
    }
    if !sigma.is_finite() {
        return Err(domain(format!("σ must be finite, got {sigma}")));
    }
    let nn = T::lit(n as f64);
    let in_ap = match p {
        Some(p) if !(p > T::one()) => return Err(domain(format!("A_p needs p > 1, got {p}"))),
        Some(p) => Some(-nn < sigma && (p.is_infinite() || sigma < nn * (p - T::one()))),
        None => None,
    };
    let in_rh = match q {
        Some(q) if !(q > T::one()) => return Err(domain(format!("RH_q needs q > 1, got {q}"))),
        Some(q) if q.is_infinite() => Some(sigma >= T::zero()),
        Some(q) => Some(sigma * q > -nn),
        None => None,
    };
    Ok(PowerMembership { in_ap, in_rh })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TheoremOperator {
    Maximal,
    /// `R^j = δ_j L^{-1/2}`, zero-based `j`.
    Riesz(usize),
    SquareS(usize),
    SquareG,
}

impl TheoremOperator {
    pub fn name(self) -> String {
        match self {
            Self::Maximal => "maximal".into(),
            Self::Riesz(j) => format!("riesz({})", j + 1),
            Self::SquareS(j) => format!("squareS({})", j + 1),
            Self::SquareG => "squareG".into(),
        }
    }
}

/// Open exponent interval `(p_lo, p_hi)` together with the weight classes
/// `A_{(1-γ_lo) p} ∩ RH_{(1/(p γ_hi))'}` admissible at each `p`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentRange {
    pub operator: TheoremOperator,
    pub p_lo: f64,
    pub p_hi: f64,
    pub gamma_lo: f64,
    pub gamma_hi: f64,
}

impl ExponentRange {
    fn from_gammas(operator: TheoremOperator, gamma_lo: f64, gamma_hi: f64, symmetric: bool) -> Self {
        let p_hi = if gamma_hi == 0.0 { f64::INFINITY } else { 1.0 / gamma_hi };
        let p_lo = if symmetric { conjugate(p_hi) } else { 1.0 / (1.0 - gamma_lo) };
        Self { operator, p_lo, p_hi, gamma_lo, gamma_hi }
    }

    /// Endpoints are excluded.
    pub fn contains(&self, p: f64) -> bool {
        self.p_lo < p && p < self.p_hi
    }

    /// `(1-γ) p`, the Muckenhoupt index.
    pub fn ap_index(&self, p: f64) -> Option<f64> {
        self.contains(p).then_some((1.0 - self.gamma_lo) * p)
    }

    /// `(1/(pγ))' = 1/(1 - pγ)`; equals 1 (every weight) when `γ = 0`.
    pub fn rh_index(&self, p: f64) -> Option<f64> {
        self.contains(p).then(|| 1.0 / (1.0 - p * self.gamma_hi))
    }

    /// Whether `x^σ` on `(0,∞)^n` lies in the admissible class at `p`.
    pub fn admits_power(&self, sigma: f64, p: f64, n: usize) -> Result<bool> {
        let (Some(a), Some(r)) = (self.ap_index(p), self.rh_index(p)) else {
            return Ok(false);
        };
        if !(a > 1.0) {
            return Ok(false);
        }
        let ap = power_weight_class(sigma, Some(a), None, n)?.in_ap == Some(true);
        let rh = r <= 1.0 || power_weight_class(sigma, None, Some(r), n)?.in_rh == Some(true);
        Ok(ap && rh)
    }

    /// Interval in interval notation, e.g. `(1.3333333333333333, inf)`.
    pub fn interval_string(&self) -> String {
        format!("({}, {})", fmt_end(self.p_lo), fmt_end(self.p_hi))
    }

    pub fn weight_class_description(&self) -> String {
        let a = if self.gamma_lo == 0.0 { "A_p".to_string() } else { format!("A_{{{}·p}}", 1.0 - self.gamma_lo) };
        if self.gamma_hi == 0.0 {
            format!("w ∈ {a} (reverse Hölder condition vacuous: RH_1 = all weights)")
        } else {
            format!("w ∈ {a} ∩ RH_{{(1/({}·p))'}}", self.gamma_hi)
        }
    }
}

fn fmt_end(v: f64) -> String {
    if v.is_infinite() {
        "inf".into()
    } else {
        format!("{v}")
    }
}

/// Exponent range and weight classes for one of the operators.
pub fn theorem_range(nu: &NuVector<f64>, which: TheoremOperator) -> Result<ExponentRange> {
    let g = gamma_nu(nu);
    match which {
        TheoremOperator::Maximal => {
            if nu.n() != 1 {
                return Err(Error::UnsupportedClaim(
                    "the maximal-function range is established only for n = 1".into(),
                ));
            }
            Ok(ExponentRange::from_gammas(which, g, g, true))
        }
        TheoremOperator::Riesz(j) | TheoremOperator::SquareS(j) => {
            Ok(ExponentRange::from_gammas(which, g, gamma_shift(nu, j)?, false))
        }
        TheoremOperator::SquareG => Ok(ExponentRange::from_gammas(which, g, g, false)),
    }
}

/// A weight on `(0,∞)^n`, either `|x|^σ` or tabulated on the grid nodes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum WeightSpec<T> {
    Power { sigma: T },
    Grid { values: Vec<T> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightConstants {
    pub p: f64,
    pub q: f64,
    pub ap_constant: f64,
    pub rh_constant: f64,
    pub ln_ap_constant: f64,
    pub ln_rh_constant: f64,
    /// Lower and upper corners of the extremal cubes.
    pub ap_argmax: (Vec<f64>, Vec<f64>),
    pub rh_argmax: (Vec<f64>, Vec<f64>),
    pub cubes: usize,
}

/// Minimal number of grid points strictly inside an admissible interval.
pub const MIN_INTERIOR_POINTS: usize = 4;

/// Cumulative cell integrals of `w`, `w^{1-p'}` and `w^q`, stored as
/// summed-area tables over the cell lattice.
struct Tables {
    shape: Vec<usize>,
    sums: [Vec<f64>; 3],
    volume: Vec<f64>,
}

impl Tables {
    fn stride(&self) -> Vec<usize> {
        let mut s = vec![1; self.shape.len()];
        for j in (0..self.shape.len().saturating_sub(1)).rev() {
            s[j] = s[j + 1] * (self.shape[j + 1] + 1);
        }
        s
    }

    /// Integral over the cell box `[lo_j, lo_j + m)` by inclusion-exclusion.
    fn box_sum(&self, table: &[f64], stride: &[usize], lo: &[usize], m: usize) -> f64 {
        let n = lo.len();
        let mut total = 0.0;
        for mask in 0..(1usize << n) {
            let mut idx = 0;
            let mut sign = 1.0;
            for j in 0..n {
                if mask >> j & 1 == 1 {
                    idx += (lo[j] + m) * stride[j];
                } else {
                    idx += lo[j] * stride[j];
                    sign = -sign;
                }
            }
            total += sign * table[idx];
        }
        total
    }
}

/// `ln(e^u - 1)` for `u > 0` and `ln(1 - e^u)` for `u < 0`, i.e. `ln|expm1(u)|`.
fn ln_abs_expm1(u: f64) -> f64 {
    if u > 0.0 {
        u + (-(-u).exp_m1()).ln()
    } else {
        (-u.exp_m1()).ln()
    }
}

/// `ln ∫_a^b x^s dx` from `ln a` and `ln(b/a)`, valid far outside the range
/// where `x^s` itself is representable.
fn ln_power_integral(s: f64, ln_a: f64, l: f64) -> f64 {
    let e = s + 1.0;
    if (e * l).abs() < 1e-12 {
        e * ln_a + l.ln()
    } else {
        e * ln_a + ln_abs_expm1(e * l) - e.abs().ln()
    }
}

fn build_tables<T: Real>(w: &WeightSpec<T>, p: f64, q: f64, grid: &TensorGrid<T>) -> Result<Tables> {
    let n = grid.n();
    let axes: Vec<Vec<f64>> = (0..n).map(|j| grid.axis(j).nodes().iter().map(|v| v.as_f64()).collect()).collect();
    let shape: Vec<usize> = axes.iter().map(|a| a.len() - 1).collect();
    if shape.iter().any(|&c| c < MIN_INTERIOR_POINTS + 1) {
        return Err(usage(format!("every axis needs at least {} nodes", MIN_INTERIOR_POINTS + 2)));
    }
    let dual = -1.0 / (p - 1.0);
    let exps = [1.0, dual, q];
    let node_values: Option<Vec<f64>> = match w {
        WeightSpec::Power { .. } => None,
        WeightSpec::Grid { values } => {
            if values.len() != grid.len() {
                return Err(usage(format!("weight has {} values for a grid of {}", values.len(), grid.len())));
            }
            if values.iter().any(|v| !(*v > T::zero()) || !v.is_finite()) {
                return Err(domain("grid weights must be positive and finite"));
            }
            Some(values.iter().map(|v| v.as_f64()).collect())
        }
    };
    let sigma = match w {
        WeightSpec::Power { sigma } => Some(sigma.as_f64()),
        WeightSpec::Grid { .. } => None,
    };

    let cells: usize = shape.iter().product();
    let node_stride: Vec<usize> = {
        let mut s = vec![1; n];
        for j in (0..n.saturating_sub(1)).rev() {
            s[j] = s[j + 1] * axes[j + 1].len();
        }
        s
    };
    let mut masses = [vec![0.0; cells], vec![0.0; cells], vec![0.0; cells]];
    let mut volume = vec![0.0; cells];
    let mut c = vec![0usize; n];
    for cell in 0..cells {
        let mut rem = cell;
        for j in (0..n).rev() {
            c[j] = rem % shape[j];
            rem /= shape[j];
        }
        let vol: f64 = (0..n).map(|j| axes[j][c[j] + 1] - axes[j][c[j]]).product();
        volume[cell] = vol;
        // tensor trapezoid over the 2^n corners
        let corners = 1usize << n;
        let mut mean = [0.0; 3];
        for mask in 0..corners {
            let mut idx = 0;
            let mut r2 = 0.0;
            for j in 0..n {
                let i = c[j] + (mask >> j & 1);
                idx += i * node_stride[j];
                r2 += axes[j][i] * axes[j][i];
            }
            let wv = match (&node_values, sigma) {
                (Some(v), _) => v[idx],
                (None, Some(s)) => r2.sqrt().powf(s),
                _ => unreachable!(),
            };
            for (m, e) in mean.iter_mut().zip(exps) {
                *m += wv.powf(e);
            }
        }
        for (m, s) in masses.iter_mut().zip(mean) {
            m[cell] = s / corners as f64 * vol;
        }
    }

    // summed-area tables with a zero border
    let ext: Vec<usize> = shape.iter().map(|s| s + 1).collect();
    let total: usize = ext.iter().product();
    let tables = Tables { shape: shape.clone(), sums: [vec![0.0; total], vec![0.0; total], vec![0.0; total]], volume: vec![0.0; total] };
    let stride = tables.stride();
    let mut tables = tables;
    let lay = |dst: &mut Vec<f64>, src: &[f64]| {
        for cell in 0..cells {
            let mut rem = cell;
            let mut idx = 0;
            for j in (0..n).rev() {
                idx += (rem % shape[j] + 1) * stride[j];
                rem /= shape[j];
            }
            dst[idx] = src[cell];
        }
        for j in 0..n {
            for idx in 0..total {
                let coord = idx / stride[j] % ext[j];
                if coord > 0 {
                    dst[idx] += dst[idx - stride[j]];
                }
            }
        }
    };
    for k in 0..3 {
        lay(&mut tables.sums[k], &masses[k]);
    }
    lay(&mut tables.volume, &volume);
    Ok(tables)
}

/// Suprema over grid intervals (cubes in `n ≥ 2`) of the `A_p` quotient
/// `⟨w⟩⟨w^{1-p'}⟩^{p-1}` and the `RH_q` quotient `⟨w^q⟩^{1/q}/⟨w⟩`.
///
/// Admissible cubes have the same number of cells `m ≥ 5` along every axis,
/// so at least four grid points lie strictly inside each edge. On a repeated
/// uniform axis these are exactly the grid-aligned cubes.
pub fn ap_rh_constants_grid<T: Real>(w: &WeightSpec<T>, p: f64, q: f64, grid: &TensorGrid<T>) -> Result<WeightConstants> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(domain(format!("A_p needs 1 < p < ∞, got {p}")));
    }
    if !(q > 1.0) || !q.is_finite() {
        return Err(domain(format!("RH_q needs 1 < q < ∞, got {q}")));
    }
    let n = grid.n();
    if n >= 2 {
        let m0 = grid.axis(0).len();
        if (1..n).any(|j| grid.axis(j).len() != m0) {
            return Err(usage("cubes need every axis to have the same number of nodes"));
        }
    }
    if let (WeightSpec::Power { sigma }, 1) = (w, n) {
        return power_constants_1d(sigma.as_f64(), p, q, grid.axis(0));
    }
    let tables = build_tables(w, p, q, grid)?;
    let stride = tables.stride();
    let shape = tables.shape.clone();
    let min_cells = MIN_INTERIOR_POINTS + 1;
    let max_cells = shape.iter().copied().min().unwrap_or(0);
    let starts: usize = shape.iter().map(|s| s + 1 - min_cells).product();

    #[derive(Clone)]
    struct Best {
        ap: f64,
        ap_at: (Vec<usize>, usize),
        rh: f64,
        rh_at: (Vec<usize>, usize),
        count: usize,
    }
    let empty = || Best { ap: f64::NEG_INFINITY, ap_at: (vec![], 0), rh: f64::NEG_INFINITY, rh_at: (vec![], 0), count: 0 };
    let best = (0..starts)
        .into_par_iter()
        .fold(empty, |mut acc, s| {
            let mut lo = vec![0; n];
            let mut rem = s;
            for j in (0..n).rev() {
                let span = shape[j] + 1 - min_cells;
                lo[j] = rem % span;
                rem /= span;
            }
            for m in min_cells..=max_cells {
                if lo.iter().zip(&shape).any(|(l, s)| l + m > *s) {
                    break;
                }
                let vol = tables.box_sum(&tables.volume, &stride, &lo, m);
                let avg: Vec<f64> = tables.sums.iter().map(|t| tables.box_sum(t, &stride, &lo, m) / vol).collect();
                let ap = avg[0] * avg[1].powf(p - 1.0);
                let rh = avg[2].powf(1.0 / q) / avg[0];
                acc.count += 1;
                if ap > acc.ap {
                    acc.ap = ap;
                    acc.ap_at = (lo.clone(), m);
                }
                if rh > acc.rh {
                    acc.rh = rh;
                    acc.rh_at = (lo.clone(), m);
                }
            }
            acc
        })
        .reduce(empty, |a, b| {
            let mut out = a.clone();
            if b.ap > out.ap {
                out.ap = b.ap;
                out.ap_at = b.ap_at.clone();
            }
            if b.rh > out.rh {
                out.rh = b.rh;
                out.rh_at = b.rh_at.clone();
            }
            out.count = a.count + b.count;
            out
        });
    let corners = |(lo, m): &(Vec<usize>, usize)| -> (Vec<f64>, Vec<f64>) {
        let a = (0..n).map(|j| grid.axis(j).nodes()[lo[j]].as_f64()).collect();
        let b = (0..n).map(|j| grid.axis(j).nodes()[lo[j] + m].as_f64()).collect();
        (a, b)
    };
    Ok(WeightConstants {
        p,
        q,
        ap_constant: best.ap,
        rh_constant: best.rh,
        ln_ap_constant: best.ap.ln(),
        ln_rh_constant: best.rh.ln(),
        ap_argmax: corners(&best.ap_at),
        rh_argmax: corners(&best.rh_at),
        cubes: best.count,
    })
}

/// Every interval between grid nodes with at least four nodes inside, with
/// the averages of `x^σ`, `x^{-σ/(p-1)}` and `x^{σq}` in closed form and in
/// log form, so that nodes may approach the origin far below `f64` range of
/// the powers themselves.
fn power_constants_1d<T: Real>(sigma: f64, p: f64, q: f64, axis: &AxisGrid<T>) -> Result<WeightConstants> {
    let x: Vec<f64> = axis.nodes().iter().map(|v| v.as_f64()).collect();
    let min_gap = MIN_INTERIOR_POINTS + 1;
    if x.len() < min_gap + 1 {
        return Err(usage(format!("need at least {} nodes", min_gap + 1)));
    }
    if x[0] <= 0.0 {
        return Err(domain("power weights need positive nodes"));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let exps = [sigma, -sigma / (p - 1.0), sigma * q];
    let ln_avg = |e: f64, i: usize, k: usize| {
        let l = lx[k] - lx[i];
        if e == 0.0 {
            0.0
        } else {
            ln_power_integral(e, lx[i], l) - (lx[k] + ln_abs_expm1(-l))
        }
    };
    let (ap, ap_at, rh, rh_at, count) = (0..x.len() - min_gap)
        .into_par_iter()
        .map(|i| {
            let mut best = (f64::NEG_INFINITY, (i, i), f64::NEG_INFINITY, (i, i), 0usize);
            for k in i + min_gap..x.len() {
                let a0 = ln_avg(exps[0], i, k);
                let ap = a0 + (p - 1.0) * ln_avg(exps[1], i, k);
                let rh = ln_avg(exps[2], i, k) / q - a0;
                best.4 += 1;
                if ap > best.0 {
                    best.0 = ap;
                    best.1 = (i, k);
                }
                if rh > best.2 {
                    best.2 = rh;
                    best.3 = (i, k);
                }
            }
            best
        })
        .reduce(
            || (f64::NEG_INFINITY, (0, 0), f64::NEG_INFINITY, (0, 0), 0),
            |a, b| {
                let (ap, ap_at) = if b.0 > a.0 { (b.0, b.1) } else { (a.0, a.1) };
                let (rh, rh_at) = if b.2 > a.2 { (b.2, b.3) } else { (a.2, a.3) };
                (ap, ap_at, rh, rh_at, a.4 + b.4)
            },
        );
    // Lebesgue weight: every average is exactly one
    let (ap, rh) = if sigma == 0.0 { (0.0, 0.0) } else { (ap, rh) };
    Ok(WeightConstants {
        p,
        q,
        ap_constant: ap.exp(),
        rh_constant: rh.exp(),
        ln_ap_constant: ap,
        ln_rh_constant: rh,
        ap_argmax: (vec![x[ap_at.0]], vec![x[ap_at.1]]),
        rh_argmax: (vec![x[rh_at.0]], vec![x[rh_at.1]]),
        cubes: count,
    })
}

/// Grid family for refinement studies: level `l` is log-spaced on
/// `[x_hi·10^{-8·3^l}, x_hi]` with `l + 2` nodes per decade. Both the reach
/// toward the origin and the density grow with the level; the reach has to
/// grow geometrically because a power weight a distance `ε` inside its class
/// only settles once `ln(b/a) ≫ 1/ε`.
pub fn refinement_grid(level: usize, x_hi: f64, n: usize) -> Result<TensorGrid<f64>> {
    let decades = 8 * 3usize.pow(level as u32);
    let lo = x_hi * 10f64.powi(-(decades as i32));
    let count = decades * (level + 2) + 1;
    TensorGrid::repeated(AxisGrid::log_spaced(lo, x_hi, count)?, n)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefinementStudy {
    pub levels: Vec<WeightConstants>,
    pub ap_stabilizes: bool,
    pub rh_stabilizes: bool,
}

pub const REFINEMENT_LEVELS: usize = 4;

/// Whether a sequence of constants settles: the last increment is negligible
/// or the increments shrink.
pub fn stabilizes(values: &[f64]) -> bool {
    if values.iter().any(|v| !v.is_finite()) {
        return false;
    }
    let k = values.len();
    if k < 3 {
        return true;
    }
    let d1 = values[k - 2] - values[k - 3];
    let d2 = values[k - 1] - values[k - 2];
    if d2.abs() <= 1e-9 * values[k - 1].abs() {
        return true;
    }
    d2.abs() < d1.abs()
}

/// Constants of a 1-D weight along the refinement family, with verdicts.
pub fn refinement_study(w: &WeightSpec<f64>, p: f64, q: f64) -> Result<RefinementStudy> {
    if matches!(w, WeightSpec::Grid { .. }) {
        return Err(usage("refinement studies need a weight defined off the grid"));
    }
    let levels = (0..REFINEMENT_LEVELS)
        .map(|l| ap_rh_constants_grid(w, p, q, &refinement_grid(l, 8.0, 1)?))
        .collect::<Result<Vec<_>>>()?;
    let ap: Vec<f64> = levels.iter().map(|c| c.ap_constant).collect();
    let rh: Vec<f64> = levels.iter().map(|c| c.rh_constant).collect();
    Ok(RefinementStudy { ap_stabilizes: stabilizes(&ap), rh_stabilizes: stabilizes(&rh), levels })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualityCheck {
    pub sigma: f64,
    pub p: f64,
    pub p0: f64,
    pub q0: f64,
    pub primal: bool,
    pub dual: bool,
}

impl DualityCheck {
    pub fn agrees(&self) -> bool {
        self.primal == self.dual
    }
}

/// Membership of `x^σ` in `A_{p/p0} ∩ RH_{(q0/p)'}` against membership of
/// `x^{σ(1-p')}` in `A_{p'/q0'} ∩ RH_{(p0'/p')'}`, both by the closed forms.
pub fn duality_check(sigma: f64, p: f64, p0: f64, q0: f64, n: usize) -> Result<DualityCheck> {
    if !(1.0 < p0 && p0 < p && p < q0) {
        return Err(domain(format!("need 1 < p0 < p < q0, got p0 = {p0}, p = {p}, q0 = {q0}")));
    }
    let pc = conjugate(p);
    let m1 = power_weight_class(sigma, Some(p / p0), Some(conjugate(q0 / p)), n)?;
    let dual_sigma = sigma * (1.0 - pc);
    let m2 = power_weight_class(dual_sigma, Some(pc / conjugate(q0)), Some(conjugate(conjugate(p0) / pc)), n)?;
    Ok(DualityCheck {
        sigma,
        p,
        p0,
        q0,
        primal: m1.in_ap == Some(true) && m1.in_rh == Some(true),
        dual: m2.in_ap == Some(true) && m2.in_rh == Some(true),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nu(v: &[f64]) -> NuVector<f64> {
        NuVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn gammas() {
        assert_eq!(gamma_nu(&nu(&[-0.75])), 0.25);
        assert!((gamma_nu(&nu(&[0.3, -0.6])) - 0.1).abs() < 1e-15);
        assert_eq!(singular_indices(&nu(&[0.3, -0.6])), vec![1]);
        assert_eq!(gamma_nu(&nu(&[-0.5, 1.0])), 0.0);
        assert_eq!(gamma_shift(&nu(&[-0.75]), 0).unwrap(), 0.0);
        assert!(gamma_shift(&nu(&[-0.75]), 1).is_err());
    }

    #[test]
    fn power_classes() {
        assert_eq!(power_weight_class(0.5, Some(2.0), None, 1).unwrap().in_ap, Some(true));
        assert_eq!(power_weight_class(-0.5, None, Some(3.0), 1).unwrap().in_rh, Some(false));
        let m = power_weight_class(0.0, Some(1.7), Some(9.0), 3).unwrap();
        assert_eq!((m.in_ap, m.in_rh), (Some(true), Some(true)));
        assert!(matches!(power_weight_class(0.0, Some(1.0), None, 1), Err(Error::Domain(_))));
        assert!(matches!(power_weight_class(0.0, None, Some(0.5), 1), Err(Error::Domain(_))));
        // two dimensions widen the window
        assert_eq!(power_weight_class(-1.5, Some(2.0), None, 2).unwrap().in_ap, Some(true));
    }

    #[test]
    fn ranges() {
        let r = theorem_range(&nu(&[-0.75]), TheoremOperator::Maximal).unwrap();
        assert!((r.p_lo - 4.0 / 3.0).abs() < 1e-14 && r.p_hi == 4.0);
        assert!((r.ap_index(2.0).unwrap() - 1.5).abs() < 1e-15);
        assert!((r.rh_index(2.0).unwrap() - 2.0).abs() < 1e-15);
        let r = theorem_range(&nu(&[-0.75]), TheoremOperator::Riesz(0)).unwrap();
        assert!((r.p_lo - 4.0 / 3.0).abs() < 1e-14 && r.p_hi.is_infinite());
        assert_eq!(r.rh_index(10.0), Some(1.0));
        assert!(r.interval_string().starts_with("(1.333"));
        assert!(r.interval_string().ends_with(", inf)"));
        let r = theorem_range(&nu(&[-0.5]), TheoremOperator::SquareG).unwrap();
        assert_eq!((r.p_lo, r.p_hi), (1.0, f64::INFINITY));
        assert!(matches!(theorem_range(&nu(&[0.0, 0.0]), TheoremOperator::Maximal), Err(Error::UnsupportedClaim(_))));
        let r = theorem_range(&nu(&[-0.75, -0.9]), TheoremOperator::SquareS(0)).unwrap();
        assert!((r.p_lo - 1.0 / 0.6).abs() < 1e-12 && (r.p_hi - 1.0 / 0.4).abs() < 1e-12);
    }

    #[test]
    fn endpoints_excluded() {
        let r = theorem_range(&nu(&[-0.75]), TheoremOperator::Maximal).unwrap();
        assert!(!r.contains(4.0) && !r.contains(r.p_lo));
        assert_eq!(r.ap_index(4.0), None);
    }

    #[test]
    fn admissible_power_weights() {
        // ν = -0.75, p = 2: A_{1.5} ∩ RH_2 means -1/2 < σ < 1/2
        let r = theorem_range(&nu(&[-0.75]), TheoremOperator::Maximal).unwrap();
        assert!(r.admits_power(0.0, 2.0, 1).unwrap());
        assert!(r.admits_power(-0.45, 2.0, 1).unwrap());
        assert!(!r.admits_power(-0.55, 2.0, 1).unwrap());
        assert!(!r.admits_power(0.55, 2.0, 1).unwrap());
    }

    #[test]
    fn lebesgue_weight_has_unit_constant() {
        let g = refinement_grid(0, 8.0, 1).unwrap();
        for p in [1.1, 2.0, 7.0] {
            let c = ap_rh_constants_grid(&WeightSpec::Power { sigma: 0.0 }, p, 3.0, &g).unwrap();
            assert_eq!(c.ap_constant, 1.0);
            assert_eq!(c.rh_constant, 1.0);
        }
        let ones = WeightSpec::Grid { values: vec![1.0; g.len()] };
        assert_eq!(ap_rh_constants_grid(&ones, 2.0, 2.0, &g).unwrap().ap_constant, 1.0);
    }

    #[test]
    fn matches_brute_force_intervals() {
        let axis = AxisGrid::log_spaced(1e-3, 8.0, 25).unwrap();
        let x: Vec<f64> = axis.nodes().to_vec();
        let g = TensorGrid::single(axis);
        let (s, p, q) = (0.5, 2.0, 1.5);
        let c = ap_rh_constants_grid(&WeightSpec::Power { sigma: s }, p, q, &g).unwrap();
        let mut ap = 0.0f64;
        let mut rh = 0.0f64;
        for i in 0..x.len() {
            for k in i + 5..x.len() {
                let (a, b) = (x[i], x[k]);
                let len = b - a;
                let mean = |e: f64| (b.powf(e + 1.0) - a.powf(e + 1.0)) / (e + 1.0) / len;
                ap = ap.max(mean(s) * mean(-s / (p - 1.0)).powf(p - 1.0));
                rh = rh.max(mean(s * q).powf(1.0 / q) / mean(s));
            }
        }
        assert!((c.ap_constant - ap).abs() < 1e-12 * ap);
        assert!((c.rh_constant - rh).abs() < 1e-12 * rh);
        assert_eq!(c.cubes, (x.len() - 5) * (x.len() - 4) / 2);
    }

    #[test]
    fn refinement_separates_members() {
        let st = refinement_study(&WeightSpec::Power { sigma: 0.5 }, 2.0, 2.0).unwrap();
        assert!(st.ap_stabilizes && st.rh_stabilizes);
        let st = refinement_study(&WeightSpec::Power { sigma: 1.1 }, 2.0, 2.0).unwrap();
        assert!(!st.ap_stabilizes);
        let st = refinement_study(&WeightSpec::Power { sigma: -0.6 }, 2.0, 2.0).unwrap();
        assert!(st.ap_stabilizes && !st.rh_stabilizes);
    }

    #[test]
    fn ap_constants_decrease_in_p() {
        let g = refinement_grid(1, 8.0, 1).unwrap();
        let w = WeightSpec::Power { sigma: -0.3 };
        let c: Vec<f64> = [1.5, 2.0, 3.0, 6.0]
            .iter()
            .map(|&p| ap_rh_constants_grid(&w, p, 2.0, &g).unwrap().ap_constant)
            .collect();
        assert!(c.windows(2).all(|v| v[1] <= v[0] * (1.0 + 1e-12)), "{c:?}");
    }

    #[test]
    fn cubes_in_two_dimensions() {
        let axis = AxisGrid::uniform(0.1, 2.0, 12).unwrap();
        let g = TensorGrid::repeated(axis, 2).unwrap();
        let c = ap_rh_constants_grid(&WeightSpec::Power { sigma: 0.0 }, 2.0, 2.0, &g).unwrap();
        assert!((c.ap_constant - 1.0).abs() < 1e-12);
        let c = ap_rh_constants_grid(&WeightSpec::Power { sigma: 1.0 }, 2.0, 2.0, &g).unwrap();
        assert!(c.ap_constant > 1.0 && c.ap_constant.is_finite());
        assert_eq!(c.ap_argmax.0.len(), 2);
    }

    #[test]
    fn duality_spot_check() {
        let d = duality_check(0.5, 2.0, 1.2, 8.0, 1).unwrap();
        assert!(d.primal && d.dual);
        let d = duality_check(1.5, 2.0, 1.2, 8.0, 1).unwrap();
        assert!(d.agrees());
    }
}
