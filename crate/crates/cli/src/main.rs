//! `laguerre`: evaluations, verification sweeps and reports for the Laguerre
//! operator toolkit.
//!
//! Exit status: 0 when every checked invariant holds, 2 on a violation (a
//! certificate is printed on stderr and stored in the JSON report), 64 on
//! usage or input errors, 74 when a report cannot be written.

mod report;

use std::fmt::Write as _;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use laguerre_core::config::SweepConfig;
use laguerre_core::grid::{GridFunction, TensorGrid};
use laguerre_core::heat::claims::{run_all_claims, run_claim, ClaimFamily, DAMPING};
use laguerre_core::heat::{kernel_log, BoundReport, KernelKind, KernelQuery};
use laguerre_core::operators::{
    eigenfunction_on, hl_maximal, maximal_semigroup, op_norm_probe, probe_family, riesz_apply_quadrature,
    riesz_spectral_on_grid, square_g, square_s, tail_operators,
};
use laguerre_core::specfun::{laguerre_function, laguerre_function_nd};
use laguerre_core::verify::{self, operator_grid, CriterionReport};
use laguerre_core::weights::{
    gamma_nu, power_weight_class, refinement_study, theorem_range, TheoremOperator, WeightSpec,
};
use laguerre_core::{Error, MultiIndex, NuVector};
use report::{bound_table, criterion_summary, criterion_table, join, Certificate, Outcome, Table, EXIT_IO, EXIT_USAGE};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "laguerre", version, about = "Laguerre operator toolkit: kernels, operators, weights and verification sweeps")]
struct Cli {
    /// TOML file overriding any subset of the defaults (see config/defaults.toml)
    #[arg(long, global = true)]
    config: Option<String>,
    /// directory for JSON/CSV reports; overrides `output` from the config
    #[arg(long, global = true)]
    output: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate the normalized eigenfunction φ_k^ν at a point
    EvalPhi {
        /// multi-index, comma separated
        #[arg(long, value_delimiter = ',', required = true)]
        k: Vec<usize>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        nu: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        x: Vec<f64>,
    },
    /// Evaluate the heat kernel or one of its derivative kernels
    HeatKernel {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        nu: Vec<f64>,
        #[arg(long)]
        t: f64,
        #[arg(long, value_delimiter = ',', required = true)]
        x: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        y: Vec<f64>,
        #[arg(long, value_enum, default_value_t = KernelArg::Heat)]
        kind: KernelArg,
        /// axis of the derivative, 1-based
        #[arg(long, default_value_t = 1)]
        j: usize,
    },
    /// Fit bound constants for one kernel claim, or all of them (criterion 6)
    VerifyBounds {
        /// claim id such as prop31iii, or `all`
        #[arg(long, default_value = "all")]
        claim: String,
        /// claim parameters (ν values, or `a` for the composition claim)
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        nu: Vec<f64>,
        #[arg(long, allow_hyphen_values = true)]
        a: Option<f64>,
    },
    /// Run one identity criterion
    VerifyIdentities {
        #[arg(long, value_enum)]
        set: IdentitySet,
    },
    /// Riesz transform R^j φ_k^ν by both routes against the closed form
    Riesz {
        #[arg(long, allow_hyphen_values = true, default_value_t = -0.5)]
        nu: f64,
        #[arg(long, default_value_t = 1)]
        k: usize,
    },
    /// Square function S or G of φ_k^ν against the closed form
    Square {
        #[arg(long, allow_hyphen_values = true, default_value_t = -0.5)]
        nu: f64,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, value_enum, default_value_t = SquareKind::S)]
        kind: SquareKind,
    },
    /// Semigroup maximal function of an interval indicator, or the time-refinement study
    Maximal {
        #[arg(long, allow_hyphen_values = true, default_value_t = -0.75)]
        nu: f64,
        #[arg(long, value_delimiter = ',', default_values_t = [1.0, 2.0])]
        interval: Vec<f64>,
        /// run the refinement study instead (doubling the time nodes)
        #[arg(long)]
        refinement: bool,
    },
    /// Power-weight membership and refinement study; without --sigma runs criterion 10
    WeightCheck {
        #[arg(long, allow_hyphen_values = true)]
        sigma: Option<f64>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        q: Option<f64>,
    },
    /// Exponent range and weight class of a theorem
    Range {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        nu: Vec<f64>,
        #[arg(long, value_enum)]
        op: RangeOp,
        /// coordinate of the Riesz transform or S, 1-based
        #[arg(long, default_value_t = 1)]
        j: usize,
    },
    /// Empirical operator-norm ratios over the probe family
    ProbeNorms {
        #[arg(long, allow_hyphen_values = true, default_value_t = -0.75)]
        nu: f64,
        #[arg(long, value_enum, default_value_t = ProbeOp::Riesz)]
        op: ProbeOp,
        #[arg(long, value_delimiter = ',', default_values_t = [1.25, 1.5, 2.0, 4.0, 8.0])]
        p: Vec<f64>,
        /// power weight exponent
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        sigma: f64,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum KernelArg {
    Heat,
    Dt,
    Delta,
    DeltaStar,
    DeltaDt,
    DeltaStarDt,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum IdentitySet {
    Orthonormality,
    Semigroup,
    ChapmanKolmogorov,
    Intertwining,
    Factorization,
    Derivatives,
    ClosedForms,
    OffDiagonal,
    Commutation,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SquareKind {
    S,
    G,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum RangeOp {
    Maximal,
    Riesz,
    SquareS,
    SquareG,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ProbeOp {
    Riesz,
    SquareS,
    SquareG,
    Maximal,
}

#[derive(Debug)]
enum Failure {
    Core(Error),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

type Run = std::result::Result<Outcome, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(msg) = init_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(EXIT_USAGE);
    }
    let mut cfg = match load_config(cli.config.as_deref()) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    if cli.output.is_some() {
        cfg.output = cli.output.clone();
    }
    let outcome = match run(&cli.command, &cfg) {
        Ok(o) => o,
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    say(&outcome.summary);
    if let Some(dir) = &cfg.output {
        match outcome.write(dir) {
            Ok(paths) => {
                for p in paths {
                    say(&format!("wrote {}", p.display()));
                }
            }
            Err(e) => {
                eprintln!("error: cannot write reports to {dir}: {e}");
                return ExitCode::from(EXIT_IO);
            }
        }
    }
    for c in &outcome.certificates {
        eprintln!("{}", c.render());
    }
    ExitCode::from(outcome.exit_code())
}

/// Prints to stdout; a closed pipe (e.g. `| head`) is not an error.
fn say(line: &str) {
    use std::io::Write;
    let _ = writeln!(std::io::stdout().lock(), "{line}");
}

fn init_threads() -> std::result::Result<(), String> {
    let Ok(v) = std::env::var("LAGUERRE_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().map_err(|_| format!("LAGUERRE_THREADS must be a positive integer, got {v:?}"))?;
    if n == 0 {
        return Err("LAGUERRE_THREADS must be positive".into());
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn load_config(path: Option<&str>) -> std::result::Result<SweepConfig, String> {
    let Some(path) = path else {
        return Ok(SweepConfig::default());
    };
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read config {path}: {e}"))?;
    toml::from_str(&text).map_err(|e| format!("invalid config {path}: {e}"))
}

fn run(cmd: &Command, cfg: &SweepConfig) -> Run {
    match cmd {
        Command::EvalPhi { k, nu, x } => eval_phi(k, nu, x),
        Command::HeatKernel { nu, t, x, y, kind, j } => heat_kernel(nu, *t, x, y, *kind, *j),
        Command::VerifyBounds { claim, nu, a } => verify_bounds(cfg, claim, nu, *a),
        Command::VerifyIdentities { set } => verify_identities(cfg, *set),
        Command::Riesz { nu, k } => riesz(cfg, *nu, *k),
        Command::Square { nu, k, kind } => square(cfg, *nu, *k, *kind),
        Command::Maximal { nu, interval, refinement } => {
            if *refinement {
                Ok(criterion_outcome("maximal", verify::maximal_refinement(cfg)?))
            } else {
                maximal(cfg, *nu, interval)
            }
        }
        Command::WeightCheck { sigma, p, q } => weight_check(cfg, *sigma, *p, *q),
        Command::Range { nu, op, j } => range(nu, *op, *j),
        Command::ProbeNorms { nu, op, p, sigma } => probe_norms(cfg, *nu, *op, p, *sigma),
    }
}

fn one_based(j: usize, n: usize) -> std::result::Result<usize, Failure> {
    if j == 0 || j > n {
        return Err(Failure::Usage(format!("--j must lie in 1..={n}, got {j}")));
    }
    Ok(j - 1)
}

fn criterion_outcome(command: &str, r: CriterionReport) -> Outcome {
    Outcome::new(command, criterion_summary(&r), &r)
        .table("rows", criterion_table(&r))
        .certify(Certificate::from_criterion(&r))
}

#[derive(Serialize)]
struct PointValue {
    k: Vec<usize>,
    nu: Vec<f64>,
    x: Vec<f64>,
    value: f64,
}

fn eval_phi(k: &[usize], nu: &[f64], x: &[f64]) -> Run {
    let nuv = NuVector::new(nu.to_vec())?;
    let value = laguerre_function_nd(&MultiIndex::new(k.to_vec()), &nuv, x)?;
    let r = PointValue { k: k.to_vec(), nu: nu.to_vec(), x: x.to_vec(), value };
    Ok(Outcome::new("eval-phi", format!("phi_{k:?}^{nu:?}({x:?}) = {value:e}"), &r))
}

#[derive(Serialize)]
struct KernelValue {
    kind: String,
    nu: Vec<f64>,
    t: f64,
    x: Vec<f64>,
    y: Vec<f64>,
    value: f64,
    ln_abs: f64,
    sign: f64,
}

fn heat_kernel(nu: &[f64], t: f64, x: &[f64], y: &[f64], kind: KernelArg, j: usize) -> Run {
    let jj = one_based(j, nu.len())?;
    let k = match kind {
        KernelArg::Heat => KernelKind::Heat,
        KernelArg::Dt => KernelKind::Dt,
        KernelArg::Delta => KernelKind::Delta(jj),
        KernelArg::DeltaStar => KernelKind::DeltaStar(jj),
        KernelArg::DeltaDt => KernelKind::DeltaDt(jj),
        KernelArg::DeltaStarDt => KernelKind::DeltaStarDt { j: jj, a: DAMPING },
    };
    let q = KernelQuery::new(NuVector::new(nu.to_vec())?, t, x.to_vec(), y.to_vec())?;
    let s = kernel_log(k, &q)?;
    let sign = f64::from(s.sign);
    let value = sign * s.ln_abs.exp();
    let r = KernelValue {
        kind: format!("{kind:?}").to_lowercase(),
        nu: nu.to_vec(),
        t,
        x: x.to_vec(),
        y: y.to_vec(),
        value,
        ln_abs: s.ln_abs,
        sign,
    };
    Ok(Outcome::new("heat-kernel", format!("{} kernel = {value:e} (ln|K| = {})", r.kind, s.ln_abs), &r))
}

fn bound_summary(reports: &[BoundReport]) -> String {
    let mut s = String::new();
    for b in reports {
        let _ = writeln!(
            s,
            "{:<28} best c = {:<4} C = {:<12.4e} violated = {}",
            b.claim_id, b.best_c, b.best_constant, b.violated
        );
    }
    let bad = reports.iter().filter(|b| b.violated).count();
    let _ = write!(s, "{} claim instance(s), {bad} violated", reports.len());
    s
}

fn verify_bounds(cfg: &SweepConfig, claim: &str, nu: &[f64], a: Option<f64>) -> Run {
    let reports = if claim == "all" {
        if !nu.is_empty() || a.is_some() {
            return Err(Failure::Usage("--claim all runs the default parameters; drop --nu/--a".into()));
        }
        run_all_claims(&cfg.c_candidates)?
    } else {
        let family = ClaimFamily::from_id(claim).ok_or_else(|| {
            let ids: Vec<&str> = ClaimFamily::ALL.iter().map(|f| f.id()).collect();
            Failure::Usage(format!("unknown claim {claim:?}; known: all, {}", ids.join(", ")))
        })?;
        let params = match (family, a) {
            (ClaimFamily::Composition, Some(a)) => vec![vec![a]],
            (_, Some(_)) => return Err(Failure::Usage("--a applies to the composition claim only".into())),
            _ if nu.is_empty() => family.default_params(),
            _ => vec![nu.to_vec()],
        };
        let grid = family.default_grid();
        params.iter().map(|p| run_claim(family, p, &grid, &cfg.c_candidates)).collect::<laguerre_core::Result<Vec<_>>>()?
    };
    let certs: Vec<Certificate> = reports.iter().filter_map(Certificate::from_bound).collect();
    Ok(Outcome::new("verify-bounds", bound_summary(&reports), &reports)
        .table("bounds", bound_table(&reports))
        .certify(certs))
}

fn verify_identities(cfg: &SweepConfig, set: IdentitySet) -> Run {
    let r = match set {
        IdentitySet::Orthonormality => verify::orthonormality(cfg)?,
        IdentitySet::Semigroup => verify::semigroup_routes(cfg)?,
        IdentitySet::ChapmanKolmogorov => verify::chapman_kolmogorov(cfg)?,
        IdentitySet::Intertwining => verify::intertwining(cfg)?,
        IdentitySet::Factorization => verify::factorization(cfg)?,
        IdentitySet::Derivatives => verify::derivative_kernels(cfg)?,
        IdentitySet::ClosedForms => verify::closed_forms(cfg)?,
        IdentitySet::OffDiagonal => {
            let (r, details) = verify::off_diagonal(cfg)?;
            let mut t = Table::new(&["t", "j", "ln_norm", "gap"]);
            for d in &details {
                for a in &d.norms {
                    t.push(vec![format!("{}", d.operator.t), a.j.to_string(), format!("{}", a.ln_norm), format!("{}", a.gap)]);
                }
            }
            #[derive(Serialize)]
            struct Full<'a> {
                criterion: &'a CriterionReport,
                details: &'a [laguerre_core::operators::OffDiagonalReport],
            }
            return Ok(Outcome::new("verify-identities", criterion_summary(&r), &Full { criterion: &r, details: &details })
                .table("rows", criterion_table(&r))
                .table("annuli", t)
                .certify(Certificate::from_criterion(&r)));
        }
        IdentitySet::Commutation => verify::commutation(cfg)?,
    };
    Ok(criterion_outcome("verify-identities", r))
}

#[derive(Serialize)]
struct ClosedFormCheck {
    operator: String,
    nu: f64,
    k: usize,
    /// relative sup-norm errors against the closed form, per route
    errors: Vec<(String, f64)>,
    limit: f64,
    time_rule_warning: Option<String>,
}

impl ClosedFormCheck {
    fn outcome(self, command: &str, x: &[f64], columns: Vec<(&str, &[f64])>) -> Outcome {
        let mut s = format!("{} on phi_{}^{}:", self.operator, self.k, self.nu);
        let mut certs = Vec::new();
        for (route, e) in &self.errors {
            let _ = write!(s, "\n  {route:<11} rel. error {e:.3e} (limit {:e})", self.limit);
            if e.is_nan() || *e >= self.limit {
                certs.push(Certificate {
                    claim_id: format!("{}-closed-form", self.operator),
                    worst_point: format!("nu={} k={} route={route}", self.nu, self.k),
                    ratio: e / self.limit,
                    measured: *e,
                    limit: Some(self.limit),
                });
            }
        }
        if let Some(w) = &self.time_rule_warning {
            let _ = write!(s, "\n  warning: {w}");
        }
        let mut header = vec!["x"];
        header.extend(columns.iter().map(|c| c.0));
        let mut t = Table::new(&header);
        for (i, xi) in x.iter().enumerate() {
            let mut row = vec![format!("{xi}")];
            row.extend(columns.iter().map(|c| format!("{:e}", c.1[i])));
            t.push(row);
        }
        Outcome::new(command, s, &self).table("values", t).certify(certs)
    }
}

fn rel_err(a: &GridFunction<f64>, b: &GridFunction<f64>, scale: f64) -> f64 {
    a.sup_distance(b) / scale
}

fn riesz(cfg: &SweepConfig, nu: f64, k: usize) -> Run {
    let grid = operator_grid(cfg)?;
    let nuv = NuVector::scalar(nu)?;
    let f = eigenfunction_on(&grid, k, nu)?;
    let lambda = 4.0 * k as f64 + 2.0 * nu + 2.0;
    let expect = if k == 0 {
        f.map(|_| 0.0)
    } else {
        let c = -2.0 * (k as f64).sqrt() / lambda.sqrt();
        GridFunction::try_from_fn(grid.clone(), |x| Ok(c * laguerre_function(k - 1, nu + 1.0, x[0])?))?
    };
    let scale = if k == 0 { f.sup_norm() } else { expect.sup_norm() };
    let quad = riesz_apply_quadrature(&f, &nuv, 0, &cfg.time_quadrature()?)?;
    let spec = riesz_spectral_on_grid(&f, &nuv, 0)?;
    let check = ClosedFormCheck {
        operator: "riesz".into(),
        nu,
        k,
        errors: vec![("quadrature".into(), rel_err(&quad.values, &expect, scale)), ("spectral".into(), rel_err(&spec, &expect, scale))],
        limit: cfg.tol_riesz,
        time_rule_warning: quad.warning.clone(),
    };
    let x = grid.axis(0).nodes().to_vec();
    Ok(check.outcome("riesz", &x, vec![("closed_form", expect.values()), ("quadrature", quad.values.values()), ("spectral", spec.values())]))
}

fn square(cfg: &SweepConfig, nu: f64, k: usize, kind: SquareKind) -> Run {
    let grid = operator_grid(cfg)?;
    let nuv = NuVector::scalar(nu)?;
    let f = eigenfunction_on(&grid, k, nu)?;
    let tq = cfg.time_quadrature()?;
    let lambda = 4.0 * k as f64 + 2.0 * nu + 2.0;
    let (name, got, expect) = match kind {
        SquareKind::S => {
            let expect = if k == 0 {
                f.map(|_| 0.0)
            } else {
                let c = 2.0 * (k as f64).sqrt() / (2.0 * lambda).sqrt();
                GridFunction::try_from_fn(grid.clone(), |x| Ok(c * laguerre_function(k - 1, nu + 1.0, x[0])?.abs()))?
            };
            ("square-s", square_s(&f, &nuv, 0, &tq)?, expect)
        }
        SquareKind::G => ("square-g", square_g(&f, &nuv, &tq)?, f.map(|v| 0.5 * v.abs())),
    };
    let scale = if expect.sup_norm() > 0.0 { expect.sup_norm() } else { f.sup_norm() };
    let check = ClosedFormCheck {
        operator: name.into(),
        nu,
        k,
        errors: vec![("quadrature".into(), rel_err(&got.values, &expect, scale))],
        limit: cfg.tol_square,
        time_rule_warning: got.warning.clone(),
    };
    let x = grid.axis(0).nodes().to_vec();
    Ok(check.outcome("square", &x, vec![("closed_form", expect.values()), ("quadrature", got.values.values())]))
}

#[derive(Serialize)]
struct MaximalReport {
    nu: f64,
    interval: (f64, f64),
    time_nodes: usize,
    /// smallest C with `M f <= C (M_1 f + T_2 f + T_3 f)` at every node
    domination_constant: f64,
    sup: f64,
}

fn maximal(cfg: &SweepConfig, nu: f64, interval: &[f64]) -> Run {
    let (a, b) = SweepConfig::window(interval, "--interval")?;
    let grid = operator_grid(cfg)?;
    let nuv = NuVector::scalar(nu)?;
    let f = GridFunction::from_fn(grid.clone(), |x| if (a..=b).contains(&x[0]) { 1.0 } else { 0.0 });
    let m = maximal_semigroup(&f, &nuv, &cfg.maximal_time_quadrature()?)?;
    let hl = hl_maximal(&f, 1.0)?;
    let (t2, t3) = tail_operators(&f, gamma_nu(&nuv))?;
    let mut c = 0.0f64;
    for i in 0..m.values().len() {
        let bound = hl.values()[i] + t2.values()[i] + t3.values()[i];
        if m.values()[i] > 0.0 {
            c = c.max(m.values()[i] / bound);
        }
    }
    let r = MaximalReport { nu, interval: (a, b), time_nodes: cfg.maximal_time_nodes, domination_constant: c, sup: m.sup_norm() };
    let mut t = Table::new(&["x", "maximal", "hl", "t2", "t3"]);
    for (i, x) in grid.axis(0).nodes().iter().enumerate() {
        t.push(vec![
            format!("{x}"),
            format!("{:e}", m.values()[i]),
            format!("{:e}", hl.values()[i]),
            format!("{:e}", t2.values()[i]),
            format!("{:e}", t3.values()[i]),
        ]);
    }
    let mut certs = Vec::new();
    if !c.is_finite() {
        certs.push(Certificate {
            claim_id: "maximal-domination".into(),
            worst_point: format!("nu={nu} interval=[{a}, {b}]"),
            ratio: c,
            measured: c,
            limit: None,
        });
    }
    let summary = format!("maximal function of 1_[{a}, {b}] at nu={nu}: sup = {:.6}, domination constant C = {c:.4}", r.sup);
    Ok(Outcome::new("maximal", summary, &r).table("values", t).certify(certs))
}

#[derive(Serialize)]
struct WeightReport {
    sigma: f64,
    p: f64,
    q: f64,
    closed_form_ap: bool,
    closed_form_rh: bool,
    ap_constants: Vec<f64>,
    rh_constants: Vec<f64>,
    ap_stabilizes: bool,
    rh_stabilizes: bool,
}

fn weight_check(cfg: &SweepConfig, sigma: Option<f64>, p: Option<f64>, q: Option<f64>) -> Run {
    let Some(sigma) = sigma else {
        if p.is_some() || q.is_some() {
            return Err(Failure::Usage("--p/--q need --sigma".into()));
        }
        return Ok(criterion_outcome("weight-check", verify::weight_criteria(cfg)?));
    };
    let (p, q) = (p.unwrap_or(2.0), q.unwrap_or(2.0));
    let m = power_weight_class(sigma, Some(p), Some(q), 1)?;
    let study = refinement_study(&WeightSpec::Power { sigma }, p, q)?;
    let r = WeightReport {
        sigma,
        p,
        q,
        closed_form_ap: m.in_ap == Some(true),
        closed_form_rh: m.in_rh == Some(true),
        ap_constants: study.levels.iter().map(|l| l.ap_constant).collect(),
        rh_constants: study.levels.iter().map(|l| l.rh_constant).collect(),
        ap_stabilizes: study.ap_stabilizes,
        rh_stabilizes: study.rh_stabilizes,
    };
    let mut t = Table::new(&["level", "ap_constant", "rh_constant"]);
    for (i, l) in study.levels.iter().enumerate() {
        t.push(vec![i.to_string(), format!("{:e}", l.ap_constant), format!("{:e}", l.rh_constant)]);
    }
    let mut certs = Vec::new();
    for (class, closed, empirical) in [("A_p", r.closed_form_ap, r.ap_stabilizes), ("RH_q", r.closed_form_rh, r.rh_stabilizes)] {
        if closed != empirical {
            certs.push(Certificate {
                claim_id: format!("power-weight-{class}"),
                worst_point: format!("sigma={sigma} p={p} q={q}"),
                ratio: f64::INFINITY,
                measured: f64::NAN,
                limit: None,
            });
        }
    }
    let summary = format!(
        "x^{sigma}: A_{p} member = {} (constants {}; stabilizes = {}), RH_{q} member = {} (constants {}; stabilizes = {})",
        r.closed_form_ap,
        join(&r.ap_constants),
        r.ap_stabilizes,
        r.closed_form_rh,
        join(&r.rh_constants),
        r.rh_stabilizes
    );
    Ok(Outcome::new("weight-check", summary, &r).table("levels", t).certify(certs))
}

#[derive(Serialize)]
struct RangeReport {
    operator: String,
    nu: Vec<f64>,
    interval: String,
    weight_class: String,
    p_lo: f64,
    p_hi: f64,
}

fn range(nu: &[f64], op: RangeOp, j: usize) -> Run {
    let nuv = NuVector::new(nu.to_vec())?;
    let which = match op {
        RangeOp::Maximal => TheoremOperator::Maximal,
        RangeOp::Riesz => TheoremOperator::Riesz(one_based(j, nu.len())?),
        RangeOp::SquareS => TheoremOperator::SquareS(one_based(j, nu.len())?),
        RangeOp::SquareG => TheoremOperator::SquareG,
    };
    let r = theorem_range(&nuv, which)?;
    let rep = RangeReport {
        operator: which.name(),
        nu: nu.to_vec(),
        interval: r.interval_string(),
        weight_class: r.weight_class_description(),
        p_lo: r.p_lo,
        p_hi: r.p_hi,
    };
    let summary = format!("{}\n{}", rep.interval, rep.weight_class);
    Ok(Outcome::new("range", summary, &rep))
}

#[derive(Serialize)]
struct ProbeSummary {
    operator: String,
    nu: f64,
    sigma: f64,
    reports: Vec<laguerre_core::operators::ProbeReport>,
}

fn probe_norms(cfg: &SweepConfig, nu: f64, op: ProbeOp, ps: &[f64], sigma: f64) -> Run {
    let grid: TensorGrid<f64> = operator_grid(cfg)?;
    let nuv = NuVector::scalar(nu)?;
    let family = probe_family(&nuv, &grid, cfg.seed)?;
    let w: Vec<f64> = grid.axis(0).nodes().iter().map(|x| x.powf(sigma)).collect();
    let tq = cfg.time_quadrature()?;
    let mtq = cfg.maximal_time_quadrature()?;
    let apply = |f: &GridFunction<f64>| -> laguerre_core::Result<GridFunction<f64>> {
        match op {
            ProbeOp::Riesz => riesz_spectral_on_grid(f, &nuv, 0),
            ProbeOp::SquareS => Ok(square_s(f, &nuv, 0, &tq)?.values),
            ProbeOp::SquareG => Ok(square_g(f, &nuv, &tq)?.values),
            ProbeOp::Maximal => maximal_semigroup(f, &nuv, &mtq),
        }
    };
    // apply once per input and reuse the images for every p
    let images = family.iter().map(|input| apply(&input.f)).collect::<laguerre_core::Result<Vec<_>>>()?;
    let mut reports = Vec::new();
    for &p in ps {
        let lookup = |f: &GridFunction<f64>| match family.iter().position(|input| std::ptr::eq(&input.f, f)) {
            Some(i) => Ok(images[i].clone()),
            None => apply(f),
        };
        reports.push(op_norm_probe(lookup, p, &w, &family)?);
    }
    let name = format!("{op:?}").to_lowercase();
    let mut t = Table::new(&["p", "input", "ratio"]);
    let mut s = format!("{name} at nu={nu}, weight x^{sigma}:");
    for r in &reports {
        for x in &r.ratios {
            t.push(vec![format!("{}", r.p), x.name.clone(), format!("{:e}", x.ratio)]);
        }
        let _ = write!(s, "\n  p = {:<5} max ratio {:.4} ({})", r.p, r.max_ratio, r.argmax);
    }
    // a diagnostic only: large ratios are never reported as violations
    Ok(Outcome::new("probe-norms", s, &ProbeSummary { operator: name, nu, sigma, reports }).table("ratios", t))
}
