//! Run configuration shared by the verification routines and the CLI.
//!
//! Every field has a default, and the defaults are exactly the settings of the
//! acceptance suite. The file format is a flat key/value table.

use serde::{Deserialize, Serialize};

use crate::error::{usage, Result};
use crate::grid::AxisSpec;
use crate::heat::claims::DEFAULT_C_CANDIDATES;
use crate::operators::{operator_axis_spec, TIME_MAX, TIME_MIN, TIME_NODES};
use crate::quadrature::TimeQuadrature;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub seed: u64,
    pub c_candidates: Vec<f64>,

    pub orthonormality_nu: Vec<f64>,
    pub orthonormality_kmax: usize,

    pub semigroup_nu: Vec<f64>,
    pub semigroup_times: Vec<f64>,
    pub semigroup_kmax: usize,

    pub ck_nu: Vec<f64>,
    /// `(s, t)` pairs flattened: `[s1, t1, s2, t2, ...]`
    pub ck_times: Vec<f64>,
    pub ck_points: Vec<f64>,

    pub intertwining_nu: Vec<f64>,
    pub intertwining_kmax: usize,
    pub intertwining_step: f64,
    pub intertwining_window: Vec<f64>,

    pub factorization_nu: Vec<f64>,
    pub factorization_nu_2d: Vec<f64>,
    pub factorization_kmax: usize,
    pub factorization_step_2d: f64,
    pub factorization_window_2d: Vec<f64>,

    pub fd_nu: Vec<f64>,
    pub fd_points: usize,

    pub riesz_nu: f64,
    pub square_nu: f64,
    pub square_g_k: Vec<usize>,

    pub offdiag_times: Vec<f64>,
    pub offdiag_beta: f64,
    pub offdiag_sigma: f64,
    pub offdiag_c: f64,
    pub offdiag_ball: Vec<f64>,
    pub offdiag_annuli: Vec<usize>,

    pub weight_cases: usize,
    pub weight_margin: f64,

    pub commutation_nu: Vec<f64>,
    pub commutation_times: Vec<f64>,
    pub commutation_kmax: usize,

    pub time_min: f64,
    pub time_max: f64,
    pub time_nodes: usize,
    /// node count for the sup over t; the maximal function needs a finer rule
    /// than the integrals do
    pub maximal_time_nodes: usize,

    pub operator_x_min: f64,
    pub operator_x_switch: f64,
    pub operator_x_max: f64,
    pub operator_log_ratio: f64,
    pub operator_linear_width: f64,
    pub operator_order: usize,

    pub tol_orthonormality: f64,
    pub tol_semigroup: f64,
    pub tol_chapman_kolmogorov: f64,
    pub tol_intertwining: f64,
    pub tol_factorization: f64,
    pub tol_derivative_fd: f64,
    pub tol_riesz: f64,
    pub tol_square: f64,
    pub tol_commutation: f64,

    /// Directory for reports; `None` prints to stdout only.
    pub output: Option<String>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        let op = operator_axis_spec();
        Self {
            seed: 20_240_917,
            c_candidates: DEFAULT_C_CANDIDATES.to_vec(),
            orthonormality_nu: vec![-0.9, -0.75, -0.5, 0.0, 1.7],
            orthonormality_kmax: 20,
            semigroup_nu: vec![-0.75, -0.5, 0.4],
            semigroup_times: vec![0.05, 0.3, 1.0],
            semigroup_kmax: 10,
            ck_nu: vec![-0.75, -0.5, 0.4],
            ck_times: vec![0.1, 0.2, 0.5, 0.5],
            ck_points: vec![0.3, 1.0, 2.2],
            intertwining_nu: vec![-0.9, -0.75, -0.5, 0.0, 1.7],
            intertwining_kmax: 10,
            intertwining_step: 0.002,
            intertwining_window: vec![0.2, 5.0],
            factorization_nu: vec![-0.75, -0.5, 0.4],
            factorization_nu_2d: vec![-0.75, 0.4],
            factorization_kmax: 5,
            factorization_step_2d: 0.004,
            factorization_window_2d: vec![0.3, 4.0],
            fd_nu: vec![-0.75, -0.5, 0.7],
            fd_points: 20,
            riesz_nu: -0.5,
            square_nu: -0.5,
            square_g_k: vec![0, 3],
            offdiag_times: vec![0.05, 0.2, 1.0],
            offdiag_beta: 0.25,
            offdiag_sigma: 0.25,
            offdiag_c: 1.0,
            offdiag_ball: vec![1.0, 2.0],
            offdiag_annuli: vec![2, 3, 4, 5, 6],
            weight_cases: 20,
            weight_margin: 0.05,
            commutation_nu: vec![-0.75, -0.5, 0.4],
            commutation_times: vec![0.1, 0.3, 1.0],
            commutation_kmax: 4,
            time_min: TIME_MIN,
            time_max: TIME_MAX,
            time_nodes: TIME_NODES,
            maximal_time_nodes: 2 * TIME_NODES,
            operator_x_min: op.x_min,
            operator_x_switch: op.x_switch,
            operator_x_max: op.x_max,
            operator_log_ratio: op.log_ratio,
            operator_linear_width: op.linear_width,
            operator_order: op.order,
            tol_orthonormality: 1e-7,
            tol_semigroup: 1e-5,
            tol_chapman_kolmogorov: 1e-6,
            tol_intertwining: 1e-5,
            tol_factorization: 1e-6,
            tol_derivative_fd: 1e-5,
            tol_riesz: 1e-4,
            tol_square: 1e-3,
            tol_commutation: 1e-7,
            output: None,
        }
    }
}

impl SweepConfig {
    pub fn operator_axis(&self) -> AxisSpec {
        AxisSpec {
            x_min: self.operator_x_min,
            x_switch: self.operator_x_switch,
            x_max: self.operator_x_max,
            log_ratio: self.operator_log_ratio,
            linear_width: self.operator_linear_width,
            order: self.operator_order,
        }
    }

    pub fn time_quadrature(&self) -> Result<TimeQuadrature<f64>> {
        TimeQuadrature::log_spaced(self.time_min, self.time_max, self.time_nodes)
    }

    pub fn maximal_time_quadrature(&self) -> Result<TimeQuadrature<f64>> {
        TimeQuadrature::log_spaced(self.time_min, self.time_max, self.maximal_time_nodes)
    }

    pub fn ck_pairs(&self) -> Result<Vec<(f64, f64)>> {
        if !self.ck_times.len().is_multiple_of(2) {
            return Err(usage("ck_times must hold (s, t) pairs"));
        }
        Ok(self.ck_times.chunks(2).map(|p| (p[0], p[1])).collect())
    }

    pub fn window(v: &[f64], name: &str) -> Result<(f64, f64)> {
        match v {
            [a, b] if a < b => Ok((*a, *b)),
            _ => Err(usage(format!("{name} must be [lo, hi] with lo < hi"))),
        }
    }
}
