//! One routine per acceptance criterion. The integration tests and the CLI
//! both call these, so a criterion always runs the same way.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::SweepConfig;
use crate::error::Result;
use crate::grid::{AxisGrid, AxisSpec, GridFunction, TensorGrid};
use crate::heat::claims::run_all_claims;
use crate::heat::{delta_heat_kernel_1d, dt_heat_kernel_1d, heat_kernel_1d, BoundReport};
use crate::operators::{
    maximal_semigroup, off_diagonal_decay, riesz_apply_quadrature, weighted_lp_norm, semigroup_apply_kernel, square_g, square_s, OffDiagonalOperator,
    OffDiagonalReport,
};
use crate::quadrature::integrate_adaptive;
use crate::specfun::{laguerre_function, laguerre_function_nd, laguerre_functions_upto, MultiIndex, NuVector};
use crate::spectral::{
    apply_delta, apply_delta_star, check_commutation, check_dual_identity, default_degree, factorization_residual,
    semigroup_apply_spectral, synthesize, Differentiation, SpectralCoeffs,
};
use crate::weights::{
    ap_rh_constants_grid, duality_check, power_weight_class, refinement_grid, refinement_study, theorem_range,
    TheoremOperator, WeightSpec,
};

/// One measured quantity of a criterion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub label: String,
    pub value: f64,
    /// `None` for rows that are pass/fail verdicts rather than measurements
    pub limit: Option<f64>,
    pub pass: bool,
}

impl Row {
    fn measured(label: impl Into<String>, value: f64, limit: f64) -> Self {
        Self { label: label.into(), value, limit: Some(limit), pass: value < limit }
    }

    fn verdict(label: impl Into<String>, value: f64, pass: bool) -> Self {
        Self { label: label.into(), value, limit: None, pass }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub number: usize,
    pub name: String,
    pub rows: Vec<Row>,
    pub pass: bool,
}

impl CriterionReport {
    fn new(number: usize, name: &str, rows: Vec<Row>) -> Self {
        let pass = !rows.is_empty() && rows.iter().all(|r| r.pass);
        Self { number, name: name.into(), rows, pass }
    }

    /// Row with the largest measured value relative to its limit, or the first
    /// failing verdict.
    pub fn worst(&self) -> Option<&Row> {
        if let Some(r) = self.rows.iter().find(|r| !r.pass) {
            return Some(r);
        }
        self.rows
            .iter()
            .filter(|r| r.limit.is_some())
            .max_by(|a, b| (a.value / a.limit.unwrap()).total_cmp(&(b.value / b.limit.unwrap())))
    }

    pub fn summary_line(&self) -> String {
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        match self.worst() {
            Some(r) => match r.limit {
                Some(l) => format!("[{verdict}] {:>2} {}: worst {} = {:.3e} (limit {:.0e})", self.number, self.name, r.label, r.value, l),
                None => format!("[{verdict}] {:>2} {}: {} checks, first open item {}", self.number, self.name, self.rows.len(), r.label),
            },
            None if self.rows.is_empty() => format!("[{verdict}] {:>2} {}: no rows", self.number, self.name),
            None => format!("[{verdict}] {:>2} {}: all {} checks hold", self.number, self.name, self.rows.len()),
        }
    }
}

fn nu1(v: f64) -> Result<NuVector<f64>> {
    NuVector::scalar(v)
}

fn rel_sup(a: &GridFunction<f64>, b: &GridFunction<f64>) -> f64 {
    a.sup_distance(b) / b.sup_norm()
}

fn uniform_axis(lo: f64, hi: f64, h: f64) -> Result<AxisGrid<f64>> {
    let count = ((hi - lo) / h).round() as usize + 1;
    AxisGrid::uniform(lo, hi, count)
}

/// Grid on which spectral quantities are integrated.
pub fn spectral_grid() -> Result<TensorGrid<f64>> {
    Ok(TensorGrid::single(AxisGrid::quadrature(&AxisSpec::default())?))
}

pub fn operator_grid(cfg: &SweepConfig) -> Result<TensorGrid<f64>> {
    Ok(TensorGrid::single(AxisGrid::quadrature(&cfg.operator_axis())?))
}

/// 1. `|⟨φ_j, φ_k⟩ - δ_jk|` by panel quadrature.
pub fn orthonormality(cfg: &SweepConfig) -> Result<CriterionReport> {
    let axis = AxisGrid::quadrature(&AxisSpec::default())?;
    let kmax = cfg.orthonormality_kmax;
    let mut rows = Vec::new();
    for &nu in &cfg.orthonormality_nu {
        let table = axis
            .nodes()
            .iter()
            .map(|&x| laguerre_functions_upto(kmax, nu, x))
            .collect::<Result<Vec<_>>>()?;
        let mut worst = 0.0f64;
        for j in 0..=kmax {
            for k in j..=kmax {
                let prod: Vec<f64> = table.iter().map(|v| v[j] * v[k]).collect();
                let target = if j == k { 1.0 } else { 0.0 };
                worst = worst.max((axis.integrate(&prod)? - target).abs());
            }
        }
        rows.push(Row::measured(format!("nu={nu}"), worst, cfg.tol_orthonormality));
    }
    Ok(CriterionReport::new(1, "orthonormality", rows))
}

/// 2. Kernel quadrature against the spectral semigroup on a finite expansion.
pub fn semigroup_routes(cfg: &SweepConfig) -> Result<CriterionReport> {
    let grid = operator_grid(cfg)?;
    let kmax = cfg.semigroup_kmax;
    let mut rows = Vec::new();
    for &nu in &cfg.semigroup_nu {
        let nuv = nu1(nu)?;
        let coeffs = SpectralCoeffs::from_pairs(
            nuv.clone(),
            kmax,
            (0..=kmax).map(|k| (MultiIndex::scalar(k), if k % 2 == 0 { 1.0 } else { -1.0 } / (k as f64 + 1.0))),
        )?;
        let f = synthesize(&coeffs, &grid)?;
        for &t in &cfg.semigroup_times {
            let spectral = synthesize(&semigroup_apply_spectral(&coeffs, t)?.coeffs, &grid)?;
            let kernel = semigroup_apply_kernel(&f, &nuv, t)?;
            rows.push(Row::measured(format!("nu={nu} t={t}"), rel_sup(&kernel, &spectral), cfg.tol_semigroup));
        }
    }
    Ok(CriterionReport::new(2, "semigroup routes", rows))
}

/// `∫_0^∞ p_s(x,z) p_t(z,y) dz` by adaptive quadrature on fixed pieces.
pub fn chapman_kolmogorov_integral(nu: f64, s: f64, t: f64, x: f64, y: f64) -> Result<f64> {
    let cuts = [0.0, 0.02, 0.1, 0.3, 0.6, 1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 5.0, 6.5, 8.0, 10.0, 14.0];
    let scale = heat_kernel_1d(nu, s + t, x, y)?;
    let mut total = 0.0;
    for w in cuts.windows(2) {
        total += integrate_adaptive(
            |z: f64| {
                if z <= 0.0 {
                    return 0.0;
                }
                heat_kernel_1d(nu, s, x, z).unwrap_or(f64::NAN) * heat_kernel_1d(nu, t, z, y).unwrap_or(f64::NAN)
            },
            w[0],
            w[1],
            1e-13 * scale,
        )?;
    }
    Ok(total)
}

/// 3. Chapman–Kolmogorov.
pub fn chapman_kolmogorov(cfg: &SweepConfig) -> Result<CriterionReport> {
    let mut rows = Vec::new();
    for &nu in &cfg.ck_nu {
        for (s, t) in cfg.ck_pairs()? {
            let mut worst = 0.0f64;
            for &x in &cfg.ck_points {
                for &y in &cfg.ck_points {
                    let lhs = chapman_kolmogorov_integral(nu, s, t, x, y)?;
                    let rhs = heat_kernel_1d(nu, s + t, x, y)?;
                    worst = worst.max(((lhs - rhs) / rhs).abs());
                }
            }
            rows.push(Row::measured(format!("nu={nu} s={s} t={t}"), worst, cfg.tol_chapman_kolmogorov));
        }
    }
    Ok(CriterionReport::new(3, "Chapman-Kolmogorov", rows))
}

fn sup_on_window(f: &GridFunction<f64>, lo: f64, hi: f64) -> f64 {
    let grid = f.grid();
    f.values()
        .iter()
        .enumerate()
        .filter(|(i, _)| grid.point(*i).iter().all(|&x| x >= lo - 1e-12 && x <= hi + 1e-12))
        .fold(0.0, |m, (_, v)| m.max(v.abs()))
}

/// Uniform axis reaching five steps beyond the window on both sides.
fn padded_axis(lo: f64, hi: f64, h: f64) -> Result<AxisGrid<f64>> {
    uniform_axis(lo - 5.0 * h, hi + 5.0 * h, h)
}

/// 4. `δφ_k^ν = -2√k φ_{k-1}^{ν+1}` and `δ*φ_k^{ν+1} = -2√(k+1) φ_{k+1}^ν`
///    with 5-point stencils on a uniform grid.
pub fn intertwining(cfg: &SweepConfig) -> Result<CriterionReport> {
    let (lo, hi) = SweepConfig::window(&cfg.intertwining_window, "intertwining_window")?;
    let grid = TensorGrid::single(padded_axis(lo, hi, cfg.intertwining_step)?);
    let phi = |k: usize, nu: f64| GridFunction::try_from_fn(grid.clone(), |x| laguerre_function(k, nu, x[0]));
    let mut rows = Vec::new();
    for &nu in &cfg.intertwining_nu {
        let nuv = nu1(nu)?;
        for k in 0..=cfg.intertwining_kmax {
            let d = apply_delta(&phi(k, nu)?, &nuv, 0)?;
            let expect = if k == 0 {
                d.map(|_| 0.0)
            } else {
                phi(k - 1, nu + 1.0)?.map(|v| -2.0 * (k as f64).sqrt() * v)
            };
            let diff = d.with_values(d.values().iter().zip(expect.values()).map(|(a, b)| a - b).collect())?;
            rows.push(Row::measured(format!("delta k={k} nu={nu}"), sup_on_window(&diff, lo, hi), cfg.tol_intertwining));

            let ds = apply_delta_star(&phi(k, nu + 1.0)?, &nuv, 0)?;
            let expect = phi(k + 1, nu)?.map(|v| -2.0 * ((k + 1) as f64).sqrt() * v);
            let diff = ds.with_values(ds.values().iter().zip(expect.values()).map(|(a, b)| a - b).collect())?;
            rows.push(Row::measured(format!("delta* k={k} nu={nu}"), sup_on_window(&diff, lo, hi), cfg.tol_intertwining));
        }
    }
    Ok(CriterionReport::new(4, "intertwining", rows))
}

/// Axis with step `h·min(1, x/(2 lo))`, reaching five steps beyond the window.
/// The finer steps near `lo` follow the `x^{ν+1/2}` behaviour of `φ_k` there.
fn graded_axis(lo: f64, hi: f64, h: f64) -> Result<AxisGrid<f64>> {
    let step = |x: f64| h * (x / (2.0 * lo)).min(1.0);
    let mut x = lo;
    for _ in 0..5 {
        x -= step(x);
    }
    let mut nodes = vec![x];
    let mut beyond = 0;
    while beyond < 5 {
        x += step(x);
        nodes.push(x);
        if x > hi {
            beyond += 1;
        }
    }
    AxisGrid::from_nodes(nodes)
}

/// 5. `Σ δ_j* δ_j φ_k = 4|k| φ_k` with stencils, `n = 1` and `n = 2`.
pub fn factorization(cfg: &SweepConfig) -> Result<CriterionReport> {
    let mut rows = Vec::new();
    let (lo, hi) = SweepConfig::window(&cfg.intertwining_window, "intertwining_window")?;
    let grid1 = TensorGrid::single(graded_axis(lo, hi, cfg.intertwining_step)?);
    for &nu in &cfg.factorization_nu {
        let nuv = nu1(nu)?;
        for k in 0..=cfg.factorization_kmax {
            let r = factorization_residual(&MultiIndex::scalar(k), &nuv, &grid1, Differentiation::Stencil)?;
            rows.push(Row::measured(format!("n=1 k={k} nu={nu}"), sup_on_window(&r, lo, hi), cfg.tol_factorization));
        }
    }
    let (lo2, hi2) = SweepConfig::window(&cfg.factorization_window_2d, "factorization_window_2d")?;
    let grid2 = TensorGrid::repeated(graded_axis(lo2, hi2, cfg.factorization_step_2d)?, 2)?;
    let nuv = NuVector::new(cfg.factorization_nu_2d.clone())?;
    for k in MultiIndex::all_up_to(2, cfg.factorization_kmax) {
        let r = factorization_residual(&k, &nuv, &grid2, Differentiation::Stencil)?;
        rows.push(Row::measured(
            format!("n=2 k={:?} nu={:?}", k.values(), cfg.factorization_nu_2d),
            sup_on_window(&r, lo2, hi2),
            cfg.tol_factorization,
        ));
    }
    Ok(CriterionReport::new(5, "factorization", rows))
}

/// 6. Every kernel bound fitted over its default sweep grid.
pub fn kernel_bounds(cfg: &SweepConfig) -> Result<(CriterionReport, Vec<BoundReport>)> {
    let reports = run_all_claims(&cfg.c_candidates)?;
    let rows = reports
        .iter()
        .map(|r| Row::verdict(r.claim_id.clone(), r.best_constant, !r.violated && r.best_constant.is_finite()))
        .collect();
    Ok((CriterionReport::new(6, "kernel bounds", rows), reports))
}

fn five_point(f: impl Fn(f64) -> Result<f64>, x: f64, h: f64) -> Result<f64> {
    Ok((f(x - 2.0 * h)? - 8.0 * f(x - h)? + 8.0 * f(x + h)? - f(x + 2.0 * h)?) / (12.0 * h))
}

/// A random admissible query `(t, x, y)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FdPoint {
    pub t: f64,
    pub x: f64,
    pub y: f64,
}

pub fn fd_points(seed: u64, count: usize) -> Vec<FdPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut log_uniform = |a: f64, b: f64| (rng.gen_range(a.ln()..b.ln())).exp();
    (0..count)
        .map(|_| FdPoint { t: log_uniform(0.05, 2.0), x: log_uniform(0.2, 3.0), y: log_uniform(0.2, 3.0) })
        .collect()
}

/// 7. Closed-form `δ_x p_t` and `∂_t p_t` against 5-point differences.
pub fn derivative_kernels(cfg: &SweepConfig) -> Result<CriterionReport> {
    let mut rows = Vec::new();
    for (i, &nu) in cfg.fd_nu.iter().enumerate() {
        let mut worst_delta = 0.0f64;
        let mut worst_dt = 0.0f64;
        for q in fd_points(cfg.seed.wrapping_add(i as u64), cfg.fd_points) {
            // the Gaussian factor varies on the scale t/|x-y| in x and t²/(x-y)² in t
            let d = (q.x - q.y).abs();
            let h = 0.005 * q.x.min(q.t.sqrt()).min(q.t / d);
            let dx = five_point(|x| heat_kernel_1d(nu, q.t, x, q.y), q.x, h)?;
            let fd = dx + (q.x - (nu + 0.5) / q.x) * heat_kernel_1d(nu, q.t, q.x, q.y)?;
            let cf = delta_heat_kernel_1d(nu, q.t, q.x, q.y)?;
            worst_delta = worst_delta.max(((fd - cf) / cf).abs());

            let fd = five_point(|t| heat_kernel_1d(nu, t, q.x, q.y), q.t, 0.005 * q.t * (q.t / (d * d)).min(1.0))?;
            let cf = dt_heat_kernel_1d(nu, q.t, q.x, q.y)?;
            worst_dt = worst_dt.max(((fd - cf) / cf).abs());
        }
        rows.push(Row::measured(format!("delta nu={nu}"), worst_delta, cfg.tol_derivative_fd));
        rows.push(Row::measured(format!("dt nu={nu}"), worst_dt, cfg.tol_derivative_fd));
    }
    Ok(CriterionReport::new(7, "derivative kernels", rows))
}

/// 8. Riesz transform and square functions against their closed forms.
pub fn closed_forms(cfg: &SweepConfig) -> Result<CriterionReport> {
    let grid = operator_grid(cfg)?;
    let tq = cfg.time_quadrature()?;
    let eig = |k: usize, nu: f64| GridFunction::try_from_fn(grid.clone(), |x| laguerre_function(k, nu, x[0]));
    let mut rows = Vec::new();

    let nu = cfg.riesz_nu;
    let r = riesz_apply_quadrature(&eig(1, nu)?, &nu1(nu)?, 0, &tq)?;
    let lambda = 4.0 + 2.0 * nu + 2.0;
    let expect = eig(0, nu + 1.0)?.map(|v| -2.0 / lambda.sqrt() * v);
    rows.push(Row::measured(format!("riesz phi_1 nu={nu}"), rel_sup(&r.values, &expect), cfg.tol_riesz));

    let nu = cfg.square_nu;
    let lambda = 4.0 + 2.0 * nu + 2.0;
    let s = square_s(&eig(1, nu)?, &nu1(nu)?, 0, &tq)?;
    let expect = eig(0, nu + 1.0)?.map(|v| (4.0 / (2.0 * lambda)).sqrt() * v.abs());
    rows.push(Row::measured(format!("S phi_1 nu={nu}"), rel_sup(&s.values, &expect), cfg.tol_square));

    for &k in &cfg.square_g_k {
        let f = eig(k, nu)?;
        let g = square_g(&f, &nu1(nu)?, &tq)?;
        let expect = f.map(|v| 0.5 * v.abs());
        rows.push(Row::measured(format!("G phi_{k} nu={nu}"), rel_sup(&g.values, &expect), cfg.tol_square));
    }
    Ok(CriterionReport::new(8, "Riesz and square-function closed forms", rows))
}

pub fn off_diagonal_operator(cfg: &SweepConfig, t: f64) -> OffDiagonalOperator {
    OffDiagonalOperator { beta: cfg.offdiag_beta, sigma: cfg.offdiag_sigma, c: cfg.offdiag_c, t }
}

/// 9. Annulus norms of the envelope operator decay like `exp(-(2^j r)²/(ct))`.
pub fn off_diagonal(cfg: &SweepConfig) -> Result<(CriterionReport, Vec<OffDiagonalReport>)> {
    let (a, b) = SweepConfig::window(&cfg.offdiag_ball, "offdiag_ball")?;
    let (center, radius) = (0.5 * (a + b), 0.5 * (b - a));
    let mut rows = Vec::new();
    let mut reports = Vec::new();
    for &t in &cfg.offdiag_times {
        let rep = off_diagonal_decay(&off_diagonal_operator(cfg, t), center, radius, &cfg.offdiag_annuli, &cfg.c_candidates)?;
        rows.push(Row::verdict(format!("t={t} fitted c"), rep.fitted_c.unwrap_or(f64::NAN), rep.pass));
        reports.push(rep);
    }
    Ok((CriterionReport::new(9, "off-diagonal decay", rows), reports))
}

/// A random power weight case for the closed-form versus empirical comparison.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightCase {
    pub sigma: f64,
    pub p: f64,
    pub q: f64,
    pub ap_closed: bool,
    pub rh_closed: bool,
    pub ap_empirical: bool,
    pub rh_empirical: bool,
}

/// Random `(σ, p, q)` at distance at least `margin` from every boundary.
pub fn weight_cases(seed: u64, count: usize, margin: f64) -> Vec<(f64, f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let sigma: f64 = rng.gen_range(-1.8..2.5);
        let p: f64 = rng.gen_range(1.2..4.0);
        let q: f64 = rng.gen_range(1.2..4.0);
        if [-1.0, p - 1.0, -1.0 / q].iter().all(|b| (sigma - b).abs() >= margin) {
            out.push((sigma, p, q));
        }
    }
    out
}

pub fn weight_case_study(cfg: &SweepConfig) -> Result<Vec<WeightCase>> {
    weight_cases(cfg.seed, cfg.weight_cases, cfg.weight_margin)
        .into_iter()
        .map(|(sigma, p, q)| {
            let m = power_weight_class(sigma, Some(p), Some(q), 1)?;
            let st = refinement_study(&WeightSpec::Power { sigma }, p, q)?;
            Ok(WeightCase {
                sigma,
                p,
                q,
                ap_closed: m.in_ap == Some(true),
                rh_closed: m.in_rh == Some(true),
                ap_empirical: st.ap_stabilizes,
                rh_empirical: st.rh_stabilizes,
            })
        })
        .collect()
}

/// 10. Weight criteria and exponent ranges.
pub fn weight_criteria(cfg: &SweepConfig) -> Result<CriterionReport> {
    let mut rows = Vec::new();
    for c in weight_case_study(cfg)? {
        let agree = c.ap_closed == c.ap_empirical && c.rh_closed == c.rh_empirical;
        rows.push(Row::verdict(format!("sigma={:.4} p={:.4} q={:.4}", c.sigma, c.p, c.q), f64::from(u8::from(agree)), agree));
    }
    let close = |a: f64, b: f64| (a.is_infinite() && b.is_infinite() && a == b) || (a - b).abs() < 1e-12;
    let mut range_row = |label: String, nu: &[f64], op: TheoremOperator, lo: f64, hi: f64| -> Result<()> {
        let r = theorem_range(&NuVector::new(nu.to_vec())?, op)?;
        rows.push(Row::verdict(label, r.p_lo, close(r.p_lo, lo) && close(r.p_hi, hi)));
        Ok(())
    };
    range_row("maximal nu=-0.75 is (4/3, 4)".into(), &[-0.75], TheoremOperator::Maximal, 4.0 / 3.0, 4.0)?;
    range_row("riesz nu=-0.75 is (4/3, inf)".into(), &[-0.75], TheoremOperator::Riesz(0), 4.0 / 3.0, f64::INFINITY)?;
    for nu in [vec![-0.5], vec![0.0], vec![1.7], vec![-0.5, 0.3], vec![0.2, -0.5, 2.0]] {
        for j in 0..nu.len() {
            for op in [TheoremOperator::Riesz(j), TheoremOperator::SquareS(j)] {
                range_row(format!("{} nu={nu:?} is (1, inf)", op.name()), &nu, op, 1.0, f64::INFINITY)?;
            }
        }
        range_row(format!("squareG nu={nu:?} is (1, inf)"), &nu, TheoremOperator::SquareG, 1.0, f64::INFINITY)?;
    }
    let d = duality_check(0.5, 2.0, 1.2, 8.0, 1)?;
    rows.push(Row::verdict("duality x^0.5 p=2 p0=1.2 q0=8", f64::from(u8::from(d.primal)), d.agrees()));
    let grid = refinement_grid(1, 8.0, 1)?;
    let w = WeightSpec::Power { sigma: -0.3 };
    let consts = [1.5, 2.0, 3.0, 6.0]
        .iter()
        .map(|&p| Ok(ap_rh_constants_grid(&w, p, 2.0, &grid)?.ap_constant))
        .collect::<Result<Vec<f64>>>()?;
    let monotone = consts.windows(2).all(|v| v[1] <= v[0] * (1.0 + 1e-12));
    rows.push(Row::verdict("A_p constants non-increasing in p", consts[0], monotone));
    Ok(CriterionReport::new(10, "weight criteria", rows))
}

/// 11. Commutation with shift 2 and the dual identity, on eigenfunctions.
pub fn commutation(cfg: &SweepConfig) -> Result<CriterionReport> {
    let grid = spectral_grid()?;
    let mut rows = Vec::new();
    for &nu in &cfg.commutation_nu {
        let nuv = nu1(nu)?;
        for &t in &cfg.commutation_times {
            let mut worst = 0.0f64;
            let mut worst_dual = 0.0f64;
            for k in 0..=cfg.commutation_kmax {
                let f = GridFunction::try_from_fn(grid.clone(), |x| laguerre_function_nd(&MultiIndex::scalar(k), &nuv, x))?;
                let rep = check_commutation(&nuv, 0, t, &f)?;
                worst = worst.max(rep.defect).max(rep.grid_defect);
                let g = SpectralCoeffs::unit(nuv.shifted(0), default_degree(1), MultiIndex::scalar(k))?;
                worst_dual = worst_dual.max(check_dual_identity(&nuv, 0, t, &g, &grid)?);
            }
            rows.push(Row::measured(format!("commutation nu={nu} t={t}"), worst, cfg.tol_commutation));
            rows.push(Row::measured(format!("dual nu={nu} t={t}"), worst_dual, cfg.tol_commutation));
        }
    }
    Ok(CriterionReport::new(11, "commutation identities", rows))
}

/// Supplementary check: the sup over discrete times changes by less than 1%
/// when the maximal time rule is doubled. Compared pointwise where the output
/// is above `1e-3` of its peak, and in `L²`. Only the time rule is under test,
/// so a coarser spatial axis than the operator grid suffices.
pub fn maximal_refinement(cfg: &SweepConfig) -> Result<CriterionReport> {
    let axis = AxisSpec { x_min: 1e-4, x_switch: 1.0, x_max: 7.0, log_ratio: 4.0, linear_width: 1.0, order: 16 };
    let grid = TensorGrid::single(AxisGrid::quadrature(&axis)?);
    let f = GridFunction::from_fn(grid.clone(), |x| if (1.0..=2.0).contains(&x[0]) { 1.0 } else { 0.0 });
    let ones = vec![1.0; grid.len()];
    let mut fine_cfg = cfg.clone();
    fine_cfg.maximal_time_nodes *= 2;
    let mut rows = Vec::new();
    for &nu in &cfg.semigroup_nu {
        let coarse = maximal_semigroup(&f, &nu1(nu)?, &cfg.maximal_time_quadrature()?)?;
        let fine = maximal_semigroup(&f, &nu1(nu)?, &fine_cfg.maximal_time_quadrature()?)?;
        let floor = 1e-3 * fine.sup_norm();
        let pointwise = coarse
            .values()
            .iter()
            .zip(fine.values())
            .filter(|(_, b)| **b > floor)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs() / b));
        rows.push(Row::measured(format!("pointwise nu={nu}"), pointwise, 0.01));
        let (a, b) = (weighted_lp_norm(&coarse, 2.0, &ones)?, weighted_lp_norm(&fine, 2.0, &ones)?);
        rows.push(Row::measured(format!("L2 nu={nu}"), (a - b).abs() / b, 0.01));
    }
    Ok(CriterionReport::new(12, "maximal time refinement", rows))
}
