//! Eigen-expansions in the Laguerre functions `φ_k^ν` and the operators that
//! act diagonally (or by an index shift) on them.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, usage, Result};
use crate::grid::{AxisGrid, GridFunction, TensorGrid};
use crate::scalar::Real;
use crate::specfun::{fill_functions, MultiIndex, NuVector};

/// Default truncation degree for `n = 1`.
pub const DEFAULT_DEGREE_1D: usize = 60;
/// Default truncation degree for `n = 2`.
pub const DEFAULT_DEGREE_2D: usize = 20;

/// Largest admissible truncation degree per dimension.
const MAX_DEGREE_PER_DIM: usize = 200;

pub fn default_degree(n: usize) -> usize {
    if n <= 1 {
        DEFAULT_DEGREE_1D
    } else {
        DEFAULT_DEGREE_2D
    }
}

/// `λ_k = 4|k| + 2(ν_1 + … + ν_n) + 2n`.
pub fn eigenvalue<T: Real>(k: &MultiIndex, nu: &NuVector<T>) -> Result<T> {
    nu.check_dim(k.n())?;
    Ok(T::lit(4.0 * k.total() as f64) + T::lit(2.0) * nu.sum() + T::lit(2.0 * nu.n() as f64))
}

/// Coefficients `c_k`, `|k| <= degree`, of an expansion in `{φ_k^ν}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralCoeffs<T> {
    pub nu: NuVector<T>,
    pub degree: usize,
    coeffs: BTreeMap<MultiIndex, T>,
}

impl<T: Real> SpectralCoeffs<T> {
    pub fn zeros(nu: NuVector<T>, degree: usize) -> Self {
        Self { nu, degree, coeffs: BTreeMap::new() }
    }

    /// Builds an expansion from explicit `(k, c_k)` pairs.
    pub fn from_pairs(nu: NuVector<T>, degree: usize, pairs: impl IntoIterator<Item = (MultiIndex, T)>) -> Result<Self> {
        let mut c = Self::zeros(nu, degree);
        for (k, v) in pairs {
            c.set(k, v)?;
        }
        Ok(c)
    }

    /// Single eigenfunction `φ_k^ν`.
    pub fn unit(nu: NuVector<T>, degree: usize, k: MultiIndex) -> Result<Self> {
        Self::from_pairs(nu, degree, [(k, T::one())])
    }

    pub fn n(&self) -> usize {
        self.nu.n()
    }

    pub fn get(&self, k: &MultiIndex) -> T {
        self.coeffs.get(k).copied().unwrap_or_else(T::zero)
    }

    pub fn set(&mut self, k: MultiIndex, v: T) -> Result<()> {
        self.nu.check_dim(k.n())?;
        if k.total() > self.degree {
            return Err(usage(format!("index of degree {} exceeds truncation {}", k.total(), self.degree)));
        }
        if v == T::zero() {
            self.coeffs.remove(&k);
        } else {
            self.coeffs.insert(k, v);
        }
        Ok(())
    }

    /// Nonzero coefficients in graded order.
    pub fn iter(&self) -> impl Iterator<Item = (&MultiIndex, &T)> {
        self.coeffs.iter()
    }

    pub fn norm_sq(&self) -> T {
        self.coeffs.values().map(|&c| c * c).sum()
    }

    /// Largest coefficient difference over the union of supports.
    pub fn max_distance(&self, other: &Self) -> T {
        let mut m = T::zero();
        for (k, &v) in &self.coeffs {
            m = m.max((v - other.get(k)).abs());
        }
        for (k, &v) in &other.coeffs {
            if !self.coeffs.contains_key(k) {
                m = m.max(v.abs());
            }
        }
        m
    }

    /// Multiplies every `c_k` by `m(k, λ_k)`.
    pub fn apply_multiplier(&self, m: impl Fn(&MultiIndex, T) -> T) -> Result<Self> {
        let mut out = Self::zeros(self.nu.clone(), self.degree);
        for (k, &c) in &self.coeffs {
            let lambda = eigenvalue(k, &self.nu)?;
            out.set(k.clone(), c * m(k, lambda))?;
        }
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.nu != other.nu {
            return Err(usage("cannot add expansions in different bases"));
        }
        let mut out = Self::zeros(self.nu.clone(), self.degree.max(other.degree));
        for (k, &v) in self.coeffs.iter().chain(other.coeffs.iter()) {
            let cur = out.get(k);
            out.set(k.clone(), cur + v)?;
        }
        Ok(out)
    }
}

/// Table `φ_k^ν(x_i)` for `k = 0..=degree`, stored as `table[k * len + i]`.
fn axis_table<T: Real>(axis: &AxisGrid<T>, nu: T, degree: usize) -> Vec<T> {
    let m = axis.len();
    let mut table = vec![T::zero(); (degree + 1) * m];
    let mut col = vec![T::zero(); degree + 1];
    for (i, &x) in axis.nodes().iter().enumerate() {
        fill_functions(nu, x, &mut col);
        for (k, &v) in col.iter().enumerate() {
            table[k * m + i] = v;
        }
    }
    table
}

fn check_degree(n: usize, degree: usize) -> Result<()> {
    if degree > MAX_DEGREE_PER_DIM * n {
        return Err(usage(format!("truncation degree {degree} exceeds {} for n = {n}", MAX_DEGREE_PER_DIM * n)));
    }
    Ok(())
}

/// `c_k = ⟨f, φ_k^ν⟩` by quadrature for all `|k| <= degree`.
pub fn expand<T: Real>(f: &GridFunction<T>, nu: &NuVector<T>, degree: usize) -> Result<SpectralCoeffs<T>> {
    let grid = f.grid();
    nu.check_dim(grid.n())?;
    check_degree(grid.n(), degree)?;
    if !grid.has_weights() {
        return Err(usage("expansion needs a grid with quadrature weights"));
    }
    let tables: Vec<Vec<T>> = (0..grid.n()).map(|j| axis_table(grid.axis(j), nu.get(j), degree)).collect();
    let shape = grid.shape();
    let indices = MultiIndex::all_up_to(grid.n(), degree);
    let values: Vec<T> = indices
        .par_iter()
        .map(|k| -> Result<T> { integrate_against(grid, &shape, &tables, k, f.values()) })
        .collect::<Result<Vec<T>>>()?;
    SpectralCoeffs::from_pairs(nu.clone(), degree, indices.into_iter().zip(values))
}

/// `∫ f φ_k` with the product structure contracted one axis at a time
/// (innermost first, matching [`TensorGrid::integrate`]).
fn integrate_against<T: Real>(grid: &TensorGrid<T>, shape: &[usize], tables: &[Vec<T>], k: &MultiIndex, f: &[T]) -> Result<T> {
    let mut cur = f.to_vec();
    for j in (0..grid.n()).rev() {
        let m = shape[j];
        let phi = &tables[j][k.get(j) * m..(k.get(j) + 1) * m];
        let axis = grid.axis(j);
        let mut next = Vec::with_capacity(cur.len() / m);
        let mut line = vec![T::zero(); m];
        for chunk in cur.chunks(m) {
            for ((l, &v), &p) in line.iter_mut().zip(chunk).zip(phi) {
                *l = v * p;
            }
            next.push(axis.integrate(&line)?);
        }
        cur = next;
    }
    Ok(cur[0])
}

/// `Σ_k c_k φ_k^ν` on the nodes of `grid`.
pub fn synthesize<T: Real>(c: &SpectralCoeffs<T>, grid: &TensorGrid<T>) -> Result<GridFunction<T>> {
    c.nu.check_dim(grid.n())?;
    let tables: Vec<Vec<T>> = (0..grid.n()).map(|j| axis_table(grid.axis(j), c.nu.get(j), c.degree)).collect();
    let shape = grid.shape();
    let terms: Vec<(&MultiIndex, &T)> = c.iter().collect();
    let values: Vec<T> = (0..grid.len())
        .into_par_iter()
        .map(|flat| {
            let idx = grid.unravel(flat);
            terms
                .iter()
                .map(|(k, &ck)| {
                    let mut v = ck;
                    for j in 0..grid.n() {
                        v = v * tables[j][k.get(j) * shape[j] + idx[j]];
                    }
                    v
                })
                .sum()
        })
        .collect();
    GridFunction::new(grid.clone(), values)
}

/// Keeps only the coefficients with `|k| = level`.
pub fn projection<T: Real>(c: &SpectralCoeffs<T>, level: usize) -> Result<SpectralCoeffs<T>> {
    if level > c.degree {
        return Err(usage(format!("projection level {level} exceeds truncation {}", c.degree)));
    }
    let mut out = SpectralCoeffs::zeros(c.nu.clone(), c.degree);
    for (k, &v) in c.iter().filter(|(k, _)| k.total() == level) {
        out.set(k.clone(), v)?;
    }
    Ok(out)
}

/// Result of a spectral semigroup step together with its truncation tail.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evolved<T> {
    pub coeffs: SpectralCoeffs<T>,
    /// `e^{-4tN}`: relative weight of the first omitted level
    pub tail_bound: T,
}

/// `c_k ↦ e^{-tλ_k} c_k`.
pub fn semigroup_apply_spectral<T: Real>(c: &SpectralCoeffs<T>, t: T) -> Result<Evolved<T>> {
    if !(t > T::zero()) || !t.is_finite() {
        return Err(domain(format!("semigroup time must be positive, got {t}")));
    }
    let coeffs = c.apply_multiplier(|_, lambda| (-t * lambda).exp())?;
    let tail_bound = (-T::lit(4.0) * t * T::lit(c.degree as f64)).exp();
    Ok(Evolved { coeffs, tail_bound })
}

/// `δ_j` on coefficients: `φ_k^ν ↦ -2√k_j φ_{k-e_j}^{ν+e_j}`.
pub fn delta_spectral<T: Real>(c: &SpectralCoeffs<T>, j: usize) -> Result<SpectralCoeffs<T>> {
    check_axis(c.n(), j)?;
    let mut out = SpectralCoeffs::zeros(c.nu.shifted(j), c.degree);
    for (k, &v) in c.iter() {
        if let Some(m) = k.down(j) {
            out.set(m, -T::lit(2.0) * T::lit(k.get(j) as f64).sqrt() * v)?;
        }
    }
    Ok(out)
}

/// Adjoint of [`delta_spectral`]: input in the basis `ν+e_j`, output in `ν`
/// (`φ_m^{ν+e_j} ↦ -2√(m_j+1) φ_{m+e_j}^ν`).
pub fn delta_star_spectral<T: Real>(c: &SpectralCoeffs<T>, nu: &NuVector<T>, j: usize) -> Result<SpectralCoeffs<T>> {
    check_axis(nu.n(), j)?;
    if c.nu != nu.shifted(j) {
        return Err(usage("δ* expects coefficients in the basis ν + e_j"));
    }
    let mut out = SpectralCoeffs::zeros(nu.clone(), c.degree + 1);
    for (m, &v) in c.iter() {
        out.set(m.up(j), -T::lit(2.0) * T::lit((m.get(j) + 1) as f64).sqrt() * v)?;
    }
    Ok(out)
}

/// `R^j = δ_j L_ν^{-1/2}`; the result lives in the basis `ν+e_j`.
pub fn riesz_apply_spectral<T: Real>(c: &SpectralCoeffs<T>, j: usize) -> Result<SpectralCoeffs<T>> {
    delta_spectral(&c.apply_multiplier(|_, lambda| lambda.sqrt().recip())?, j)
}

fn check_axis(n: usize, j: usize) -> Result<()> {
    if j >= n {
        return Err(usage(format!("coordinate {j} out of range for dimension {n}")));
    }
    Ok(())
}

/// How `∂_j` is taken on the grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Differentiation {
    /// 5-point finite differences (any grid with at least 7 nodes per axis)
    Stencil,
    /// derivative of the panel interpolant (Gauss–Legendre grids)
    Panel,
}

fn axis_derivative<T: Real>(f: &GridFunction<T>, j: usize, scheme: Differentiation) -> Result<Vec<T>> {
    let grid = f.grid();
    let axis = grid.axis(j);
    grid.map_lines(f.values(), j, |line| match scheme {
        Differentiation::Stencil => axis.derivative(line),
        Differentiation::Panel => axis.panel_derivative(line),
    })
}

/// `(±∂_j + x_j - (ν_j + 1/2)/x_j) f`.
fn first_order<T: Real>(f: &GridFunction<T>, nu: &NuVector<T>, j: usize, sign: T, scheme: Differentiation) -> Result<GridFunction<T>> {
    let grid = f.grid();
    nu.check_dim(grid.n())?;
    check_axis(grid.n(), j)?;
    let d = axis_derivative(f, j, scheme)?;
    let c = nu.get(j) + T::lit(0.5);
    let stride = grid.stride(j);
    let m = grid.axis(j).len();
    let xs = grid.axis(j).nodes();
    let values = f
        .values()
        .iter()
        .zip(&d)
        .enumerate()
        .map(|(flat, (&v, &dv))| {
            let x = xs[(flat / stride) % m];
            sign * dv + (x - c / x) * v
        })
        .collect();
    f.with_values(values)
}

/// `δ_j f = ∂_j f + x_j f - (ν_j + 1/2) f / x_j` with 5-point stencils.
pub fn apply_delta<T: Real>(f: &GridFunction<T>, nu: &NuVector<T>, j: usize) -> Result<GridFunction<T>> {
    first_order(f, nu, j, T::one(), Differentiation::Stencil)
}

/// `δ_j* g = -∂_j g + x_j g - (ν_j + 1/2) g / x_j`, the adjoint of `δ_j` for the
/// order `ν`; it maps functions of order `ν+e_j` to order `ν`.
pub fn apply_delta_star<T: Real>(g: &GridFunction<T>, nu: &NuVector<T>, j: usize) -> Result<GridFunction<T>> {
    first_order(g, nu, j, -T::one(), Differentiation::Stencil)
}

/// [`apply_delta`] with an explicit differentiation scheme.
pub fn apply_delta_with<T: Real>(f: &GridFunction<T>, nu: &NuVector<T>, j: usize, scheme: Differentiation) -> Result<GridFunction<T>> {
    first_order(f, nu, j, T::one(), scheme)
}

/// [`apply_delta_star`] with an explicit differentiation scheme.
pub fn apply_delta_star_with<T: Real>(g: &GridFunction<T>, nu: &NuVector<T>, j: usize, scheme: Differentiation) -> Result<GridFunction<T>> {
    first_order(g, nu, j, -T::one(), scheme)
}

/// Sup-norm defects of `e^{-t(L_{ν+e_j}+α)} δ_j f = δ_j e^{-tL_ν} f`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommutationReport {
    pub nu: Vec<f64>,
    pub j: usize,
    pub t: f64,
    pub alpha: f64,
    /// both sides from coefficients
    pub defect: f64,
    /// left side with `δ_j f` differentiated on the grid and re-expanded
    pub grid_defect: f64,
    /// shift `2 - 4ν_j`, reported for comparison only
    pub alternative_alpha: f64,
    pub alternative_defect: f64,
    pub scale: f64,
}

/// Checks the commutation rule with shift `α = 2`.
///
/// The right side is `δ_j` applied (by the index shift) to the evolved
/// coefficients of `f`. The left side evolves `δ_j f` in the basis `ν+e_j`,
/// where `δ_j f` is formed once from the coefficients of `f` and once by panel
/// differentiation of the samples followed by a fresh expansion.
pub fn check_commutation<T: Real>(nu: &NuVector<T>, j: usize, t: T, f: &GridFunction<T>) -> Result<CommutationReport> {
    check_axis(nu.n(), j)?;
    if !(t > T::zero()) {
        return Err(domain(format!("semigroup time must be positive, got {t}")));
    }
    let degree = default_degree(nu.n());
    let c = expand(f, nu, degree)?;
    let grid = f.grid();
    let shifted = nu.shifted(j);

    let rhs = synthesize(&delta_spectral(&semigroup_apply_spectral(&c, t)?.coeffs, j)?, grid)?;
    let left = |alpha: T, dc: &SpectralCoeffs<T>| -> Result<GridFunction<T>> {
        let evolved = dc.apply_multiplier(|_, lambda| (-t * (lambda + alpha)).exp())?;
        synthesize(&evolved, grid)
    };
    let dc = delta_spectral(&c, j)?;
    let two = T::lit(2.0);
    let alt = two - T::lit(4.0) * nu.get(j);
    let lhs = left(two, &dc)?;
    let lhs_alt = left(alt, &dc)?;
    let df = apply_delta_with(f, nu, j, Differentiation::Panel)?;
    let lhs_grid = left(two, &expand(&df, &shifted, degree)?)?;

    Ok(CommutationReport {
        nu: nu.values().iter().map(|v| v.as_f64()).collect(),
        j,
        t: t.as_f64(),
        alpha: 2.0,
        defect: lhs.sup_distance(&rhs).as_f64(),
        grid_defect: lhs_grid.sup_distance(&rhs).as_f64(),
        alternative_alpha: alt.as_f64(),
        alternative_defect: lhs_alt.sup_distance(&rhs).as_f64(),
        scale: rhs.sup_norm().as_f64(),
    })
}

/// Sup-norm defect of
/// `e^{-tL_ν} L_ν^{-1/2} δ_j* g = δ_j* e^{-t(L_{ν+e_j}+2)} (L_{ν+e_j}+2)^{-1/2} g`
/// for `g` given in the basis `ν+e_j`.
pub fn check_dual_identity<T: Real>(nu: &NuVector<T>, j: usize, t: T, g: &SpectralCoeffs<T>, grid: &TensorGrid<T>) -> Result<f64> {
    if !(t > T::zero()) {
        return Err(domain(format!("semigroup time must be positive, got {t}")));
    }
    let two = T::lit(2.0);
    let lhs_c = delta_star_spectral(g, nu, j)?.apply_multiplier(|_, lambda| (-t * lambda).exp() / lambda.sqrt())?;
    let rhs_inner = g.apply_multiplier(|_, lambda| (-t * (lambda + two)).exp() / (lambda + two).sqrt())?;
    let rhs_c = delta_star_spectral(&rhs_inner, nu, j)?;
    // the right side is assembled on the grid: synthesize in ν+e_j, then δ_j*
    let rhs_grid = synthesize(&rhs_inner, grid)?;
    let rhs = apply_delta_star_with(&rhs_grid, nu, j, Differentiation::Panel)?;
    let lhs = synthesize(&lhs_c, grid)?;
    let spectral = synthesize(&rhs_c, grid)?;
    Ok(lhs.sup_distance(&rhs).max(lhs.sup_distance(&spectral)).as_f64())
}

/// Residual `Σ_j δ_j* δ_j φ_k - 4|k| φ_k` with grid derivatives.
pub fn factorization_residual<T: Real>(k: &MultiIndex, nu: &NuVector<T>, grid: &TensorGrid<T>, scheme: Differentiation) -> Result<GridFunction<T>> {
    let phi = GridFunction::try_from_fn(grid.clone(), |x| crate::specfun::laguerre_function_nd(k, nu, x))?;
    let mut acc = vec![T::zero(); grid.len()];
    for j in 0..nu.n() {
        let d = apply_delta_with(&phi, nu, j, scheme)?;
        let dd = apply_delta_star_with(&d, nu, j, scheme)?;
        for (a, v) in acc.iter_mut().zip(dd.values()) {
            *a = *a + *v;
        }
    }
    let four_k = T::lit(4.0 * k.total() as f64);
    for (a, p) in acc.iter_mut().zip(phi.values()) {
        *a = *a - four_k * *p;
    }
    phi.with_values(acc)
}

/// `‖Σ_j δ_j* δ_j φ_k - 4|k| φ_k‖_∞` over the whole grid.
pub fn factorization_defect<T: Real>(k: &MultiIndex, nu: &NuVector<T>, grid: &TensorGrid<T>, scheme: Differentiation) -> Result<f64> {
    Ok(factorization_residual(k, nu, grid, scheme)?.sup_norm().as_f64())
}
