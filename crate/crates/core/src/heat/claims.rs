//! Catalog of kernel inequalities checked by constant fitting.
//!
//! Each claim pairs a kernel (evaluated as `ln|K|`) with an envelope family
//! `E_c` and a sweep grid. Identifiers are stable and used by the CLI.

use serde::{Deserialize, Serialize};

use super::envelope::{ln_boundary, ln_gauss, EnvelopeSpec};
use super::fit::{fit_bound_constants, BoundReport, SweepGrid};
use super::kernel::{kernel_log, KernelKind, KernelQuery};
use crate::error::{usage, Error, Result};
use crate::quadrature::integrate_adaptive;
use crate::specfun::{gamma_scalar, NuVector};

pub const DEFAULT_C_CANDIDATES: [f64; 6] = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0];

/// Damping rate used in the `δ* ∂_t [e^{-at} p^{ν+1}]` claims.
pub const DAMPING: f64 = 0.5;

/// Inner Gaussian constant of the composition claim.
pub const COMPOSITION_C0: f64 = 1.0;

const DERIVATIVE_NUS: [f64; 4] = [-0.75, -0.5, -0.25, 0.7];
const COMPOSITION_AS: [f64; 3] = [0.1, 0.25, 0.4];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClaimFamily {
    /// heat kernel bound for `ν > -1/2`, boundary factor `(1+√t/ρ(x)+√t/ρ(y))^{-(ν+1/2)}`, `ρ = min(x, 1/x)`
    HeatAbove,
    /// heat kernel bound for `ν = -1/2` with `N = 3` and `ρ(x) = 1/(1+x)`
    HeatCritical,
    /// heat kernel bound for `-1 < ν < -1/2` with `(1+√t/x)^γ (1+√t/y)^γ`
    HeatBelow,
    /// Gaussian plus the two off-diagonal power terms, `-1 < ν < -1/2`
    SplitBound,
    Delta,
    DeltaStar,
    Dt,
    MixedDt,
    MixedDeltaDt,
    MixedDeltaStarDt,
    Composition,
    Nd2Heat,
    Nd2Dt,
    Nd2DeltaDt,
    Nd2DeltaStarDt,
}

impl ClaimFamily {
    pub const ALL: [ClaimFamily; 15] = [
        ClaimFamily::HeatAbove,
        ClaimFamily::HeatCritical,
        ClaimFamily::HeatBelow,
        ClaimFamily::SplitBound,
        ClaimFamily::Delta,
        ClaimFamily::DeltaStar,
        ClaimFamily::Dt,
        ClaimFamily::MixedDt,
        ClaimFamily::MixedDeltaDt,
        ClaimFamily::MixedDeltaStarDt,
        ClaimFamily::Composition,
        ClaimFamily::Nd2Heat,
        ClaimFamily::Nd2Dt,
        ClaimFamily::Nd2DeltaDt,
        ClaimFamily::Nd2DeltaStarDt,
    ];

    pub fn id(self) -> &'static str {
        match self {
            ClaimFamily::HeatAbove => "prop31i",
            ClaimFamily::HeatCritical => "prop31ii",
            ClaimFamily::HeatBelow => "prop31iii",
            ClaimFamily::SplitBound => "split-bound",
            ClaimFamily::Delta => "delta",
            ClaimFamily::DeltaStar => "delta-star",
            ClaimFamily::Dt => "dt",
            ClaimFamily::MixedDt => "mixed-dt",
            ClaimFamily::MixedDeltaDt => "mixed-delta-dt",
            ClaimFamily::MixedDeltaStarDt => "mixed-delta-star-dt",
            ClaimFamily::Composition => "composition",
            ClaimFamily::Nd2Heat => "nd2-heat",
            ClaimFamily::Nd2Dt => "nd2-dt",
            ClaimFamily::Nd2DeltaDt => "nd2-delta-dt",
            ClaimFamily::Nd2DeltaStarDt => "nd2-delta-star-dt",
        }
    }

    pub fn from_id(id: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.id() == id)
    }

    pub fn dimension(self) -> usize {
        match self {
            ClaimFamily::Nd2Heat | ClaimFamily::Nd2Dt | ClaimFamily::Nd2DeltaDt | ClaimFamily::Nd2DeltaStarDt => 2,
            _ => 1,
        }
    }

    /// Parameter values run by default (`ν`, or `a` for the composition claim).
    pub fn default_params(self) -> Vec<Vec<f64>> {
        match self {
            ClaimFamily::HeatAbove => vec![vec![0.7]],
            ClaimFamily::HeatCritical => vec![vec![-0.5]],
            ClaimFamily::HeatBelow | ClaimFamily::SplitBound => vec![vec![-0.75]],
            ClaimFamily::Delta
            | ClaimFamily::DeltaStar
            | ClaimFamily::Dt
            | ClaimFamily::MixedDt
            | ClaimFamily::MixedDeltaDt
            | ClaimFamily::MixedDeltaStarDt => DERIVATIVE_NUS.iter().map(|&v| vec![v]).collect(),
            ClaimFamily::Composition => COMPOSITION_AS.iter().map(|&a| vec![a]).collect(),
            _ => vec![vec![-0.75, 0.4]],
        }
    }

    pub fn default_grid(self) -> SweepGrid {
        if self.dimension() == 2 {
            SweepGrid::reduced_2d()
        } else {
            SweepGrid::standard()
        }
    }

    fn check_params(self, p: &[f64]) -> Result<()> {
        let unsupported = |msg: String| Err(Error::UnsupportedClaim(msg));
        if p.len() != self.dimension() {
            return Err(usage(format!("claim {} takes {} parameter(s), got {}", self.id(), self.dimension(), p.len())));
        }
        if self == ClaimFamily::Composition {
            if !(p[0] >= 0.0 && p[0] < 0.5) {
                return unsupported(format!("composition exponent a must lie in [0, 1/2), got {}", p[0]));
            }
            return Ok(());
        }
        NuVector::new(p.to_vec())?;
        let nu = p[0];
        match self {
            ClaimFamily::HeatAbove if nu <= -0.5 => unsupported(format!("{} requires ν > -1/2, got {nu}", self.id())),
            ClaimFamily::HeatCritical if nu != -0.5 => unsupported(format!("{} requires ν = -1/2, got {nu}", self.id())),
            ClaimFamily::HeatBelow | ClaimFamily::SplitBound if nu >= -0.5 => {
                unsupported(format!("{} requires -1 < ν < -1/2, got {nu}", self.id()))
            }
            _ => Ok(()),
        }
    }

    /// Identifier of one parametrized instance, e.g. `delta[nu=-0.75]`.
    pub fn instance_id(self, p: &[f64]) -> String {
        let name = if self == ClaimFamily::Composition { "a" } else { "nu" };
        let vals: Vec<String> = p.iter().map(|v| format!("{v}")).collect();
        format!("{}[{}={}]", self.id(), name, vals.join(","))
    }
}

fn rho_min(x: f64) -> f64 {
    x.min(1.0 / x)
}

fn log_add(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + ((a - m).exp() + (b - m).exp()).ln()
}

fn ln_abs_kernel(kind: KernelKind<f64>, nu: &[f64], t: f64, x: &[f64], y: &[f64]) -> Result<f64> {
    let q = KernelQuery { nu: NuVector::new(nu.to_vec())?, t, x: x.to_vec(), y: y.to_vec() };
    Ok(kernel_log(kind, &q)?.ln_abs)
}

/// Boundary factor `Π_j (1+√t/x_j)^{γ_j} (1+√t/y_j)^{γ_j}`, with the `y`
/// factor of coordinate `skip_y` omitted.
fn ln_product_boundary(nu: &[f64], t: f64, x: &[f64], y: &[f64], skip_y: Option<usize>) -> f64 {
    (0..nu.len())
        .map(|j| {
            let g = gamma_scalar(nu[j]);
            let fy = if skip_y == Some(j) { 0.0 } else { g * ln_boundary(t, y[j]) };
            g * ln_boundary(t, x[j]) + fy
        })
        .sum()
}

/// `ln ∫ H_{t,a,c0}(x,z) H_{t,a,c0}(z,y) dz` over `z ∈ [1e-4, 20]`.
///
/// The two Gaussians combine to `exp(-(x-y)²/(2 c0 t)) exp(-2(z-m)²/(c0 t))`
/// with `m = (x+y)/2`, leaving a single peaked integral.
pub fn ln_composition(a: f64, c0: f64, t: f64, x: f64, y: f64) -> Result<f64> {
    let (lo, hi) = (1e-4, 20.0);
    let m = 0.5 * (x + y);
    let sigma = (c0 * t / 4.0).sqrt();
    let win_lo = (m - 12.0 * sigma).max(lo);
    let win_hi = (m + 12.0 * sigma).min(hi);
    let st = t.sqrt();
    let f = |z: f64| (-2.0 * (z - m).powi(2) / (c0 * t) + 2.0 * a * (st / z).ln_1p()).exp();
    let mut breaks = vec![win_lo];
    let mut b = win_lo;
    while b * 4.0 < win_hi.min(1.0) {
        b *= 4.0;
        breaks.push(b);
    }
    if m > win_lo && m < win_hi {
        breaks.push(m);
    }
    breaks.push(win_hi);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let tol = 1e-13 * sigma;
    let mut inner = 0.0;
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            inner += integrate_adaptive(f, w[0], w[1], tol)?;
        }
    }
    let outer = -t.ln() + a * ln_boundary(t, x) + a * ln_boundary(t, y) - (x - y).powi(2) / (2.0 * c0 * t);
    Ok(outer + inner.ln())
}

/// Runs one claim instance on a grid.
pub fn run_claim(family: ClaimFamily, params: &[f64], grid: &SweepGrid, c_candidates: &[f64]) -> Result<BoundReport> {
    family.check_params(params)?;
    if grid.n() != family.dimension() {
        return Err(usage(format!("claim {} needs a {}-dimensional grid", family.id(), family.dimension())));
    }
    let id = family.instance_id(params);
    let p = params.to_vec();
    let g0 = gamma_scalar(p[0]);
    let nu0 = p[0];
    let half_lt = |t: f64| -0.5 * t.ln();
    match family {
        ClaimFamily::HeatAbove | ClaimFamily::HeatCritical | ClaimFamily::HeatBelow => {
            let k = |t: f64, x: &[f64], y: &[f64]| ln_abs_kernel(KernelKind::Heat, &p, t, x, y);
            let e = |c: f64, t: f64, x: &[f64], y: &[f64]| {
                let base = -t / 2.0 + half_lt(t) + ln_gauss(t, c, x, y);
                let st = t.sqrt();
                base + match family {
                    ClaimFamily::HeatAbove => -(nu0 + 0.5) * (1.0 + st / rho_min(x[0]) + st / rho_min(y[0])).ln(),
                    ClaimFamily::HeatCritical => -3.0 * (1.0 + st * (1.0 + x[0]) + st * (1.0 + y[0])).ln(),
                    _ => g0 * (ln_boundary(t, x[0]) + ln_boundary(t, y[0])),
                }
            };
            fit_bound_constants(&id, k, e, grid, c_candidates)
        }
        ClaimFamily::SplitBound => {
            let k = |t: f64, x: &[f64], y: &[f64]| ln_abs_kernel(KernelKind::Heat, &p, t, x, y);
            let e = |c: f64, t: f64, x: &[f64], y: &[f64]| {
                let gauss = half_lt(t) + ln_gauss(t, c, x, y);
                let (x, y) = (x[0], y[0]);
                let off = if y < x / 2.0 { -x.ln() + g0 * (x / y).ln() } else { -y.ln() + g0 * (y / x).ln() };
                log_add(gauss, off)
            };
            fit_bound_constants(&id, k, e, grid, c_candidates)
        }
        ClaimFamily::Delta | ClaimFamily::DeltaStar | ClaimFamily::Dt => {
            let kind = match family {
                ClaimFamily::Delta => KernelKind::Delta(0),
                ClaimFamily::DeltaStar => KernelKind::DeltaStar(0),
                _ => KernelKind::Dt,
            };
            let k = |t: f64, x: &[f64], y: &[f64]| ln_abs_kernel(kind, &p, t, x, y);
            let e = |c: f64, t: f64, x: &[f64], y: &[f64]| {
                let g = ln_gauss(t, c, x, y);
                match family {
                    ClaimFamily::Delta => -t.ln() + g + g0 * ln_boundary(t, y[0]),
                    ClaimFamily::DeltaStar => -t.ln() + g + g0 * ln_boundary(t, x[0]),
                    _ => -1.5 * t.ln() + g + g0 * (ln_boundary(t, x[0]) + ln_boundary(t, y[0])),
                }
            };
            fit_bound_constants(&id, k, e, grid, c_candidates)
        }
        ClaimFamily::MixedDt | ClaimFamily::MixedDeltaDt | ClaimFamily::MixedDeltaStarDt => {
            let kind = match family {
                ClaimFamily::MixedDt => KernelKind::Dt,
                ClaimFamily::MixedDeltaDt => KernelKind::DeltaDt(0),
                _ => KernelKind::DeltaStarDt { j: 0, a: DAMPING },
            };
            let k = |t: f64, x: &[f64], y: &[f64]| ln_abs_kernel(kind, &p, t, x, y);
            let e = |c: f64, t: f64, x: &[f64], y: &[f64]| {
                let g = ln_gauss(t, c, x, y);
                match family {
                    ClaimFamily::MixedDt => -1.5 * t.ln() + g + ln_product_boundary(&p, t, x, y, None),
                    ClaimFamily::MixedDeltaDt => -2.0 * t.ln() + g + ln_product_boundary(&p, t, x, y, None),
                    _ => -2.0 * t.ln() + g + ln_product_boundary(&p, t, x, y, Some(0)),
                }
            };
            fit_bound_constants(&id, k, e, grid, c_candidates)
        }
        ClaimFamily::Composition => {
            let a = p[0];
            let k = |t: f64, x: &[f64], y: &[f64]| ln_composition(a, COMPOSITION_C0, t, x[0], y[0]);
            let e = |c: f64, t: f64, x: &[f64], y: &[f64]| {
                EnvelopeSpec::h(a, c, 1).and_then(|s| s.ln_eval(t, x, y)).unwrap_or(f64::NAN)
            };
            fit_bound_constants(&id, k, e, grid, c_candidates)
        }
        ClaimFamily::Nd2Heat | ClaimFamily::Nd2Dt | ClaimFamily::Nd2DeltaDt | ClaimFamily::Nd2DeltaStarDt => {
            let (kind, power, skip) = match family {
                ClaimFamily::Nd2Heat => (KernelKind::Heat, 1.0, None),
                ClaimFamily::Nd2Dt => (KernelKind::Dt, 2.0, None),
                ClaimFamily::Nd2DeltaDt => (KernelKind::DeltaDt(0), 2.5, None),
                _ => (KernelKind::DeltaStarDt { j: 0, a: DAMPING }, 2.5, Some(0)),
            };
            let k = |t: f64, x: &[f64], y: &[f64]| ln_abs_kernel(kind, &p, t, x, y);
            let e = |c: f64, t: f64, x: &[f64], y: &[f64]| {
                -power * t.ln() + ln_gauss(t, c, x, y) + ln_product_boundary(&p, t, x, y, skip)
            };
            fit_bound_constants(&id, k, e, grid, c_candidates)
        }
    }
}

/// Every claim instance with its default parameters and grid.
pub fn run_all_claims(c_candidates: &[f64]) -> Result<Vec<BoundReport>> {
    let mut out = Vec::new();
    for family in ClaimFamily::ALL {
        let grid = family.default_grid();
        for p in family.default_params() {
            out.push(run_claim(family, &p, &grid, c_candidates)?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_round_trip() {
        for f in ClaimFamily::ALL {
            assert_eq!(ClaimFamily::from_id(f.id()), Some(f));
        }
        assert_eq!(ClaimFamily::HeatBelow.instance_id(&[-0.75]), "prop31iii[nu=-0.75]");
    }

    #[test]
    fn case_restrictions_are_unsupported_claims() {
        let grid = SweepGrid::log((0.1, 1.0), 2, (0.5, 1.0), 2, 1);
        let r = run_claim(ClaimFamily::HeatBelow, &[0.3], &grid, &DEFAULT_C_CANDIDATES);
        assert!(matches!(r, Err(Error::UnsupportedClaim(_))));
    }

    #[test]
    fn composition_matches_direct_quadrature() {
        let (a, t, x, y) = (0.25, 0.05, 0.3, 0.5);
        let h = EnvelopeSpec::h(a, COMPOSITION_C0, 1).unwrap();
        let f = |z: f64| envelope_product(&h, t, x, y, z);
        let mut direct = 0.0;
        let mut lo = 1e-4_f64;
        while lo < 20.0 {
            let hi = (lo * 2.0).min(lo + 0.05).min(20.0);
            direct += integrate_adaptive(f, lo, hi, 1e-14).unwrap();
            lo = hi;
        }
        let got = ln_composition(a, COMPOSITION_C0, t, x, y).unwrap().exp();
        assert!(((got - direct) / direct).abs() < 1e-9, "got={got} direct={direct}");
    }

    fn envelope_product(h: &EnvelopeSpec<f64>, t: f64, x: f64, y: f64, z: f64) -> f64 {
        h.ln_eval(t, &[x], &[z]).unwrap().exp() * h.ln_eval(t, &[z], &[y]).unwrap().exp()
    }
}
