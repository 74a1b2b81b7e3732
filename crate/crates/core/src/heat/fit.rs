//! Fitting the constants `(C, c)` of kernel inequalities `|K| <= C E_c` on
//! finite parameter grids.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{usage, Result};

/// Parameter grid for bound sweeps: times and spatial points; `x` and `y`
/// each range over all of `points`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub t: Vec<f64>,
    pub points: Vec<Vec<f64>>,
}

fn log_values(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count).map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp()).collect()
}

impl SweepGrid {
    /// Log-spaced times and a log-spaced tensor product of spatial values.
    pub fn log(t_range: (f64, f64), t_count: usize, x_range: (f64, f64), x_count: usize, n: usize) -> Self {
        let axis = log_values(x_range.0, x_range.1, x_count);
        let mut points: Vec<Vec<f64>> = vec![Vec::new()];
        for _ in 0..n {
            points = points
                .into_iter()
                .flat_map(|p| {
                    axis.iter().map(move |&v| {
                        let mut q = p.clone();
                        q.push(v);
                        q
                    })
                })
                .collect();
        }
        Self { t: log_values(t_range.0, t_range.1, t_count), points }
    }

    /// `t ∈ [1e-3, 10]` (40 log points), `x, y ∈ [1e-3, 8]` (60 log points).
    pub fn standard() -> Self {
        Self::log((1e-3, 10.0), 40, (1e-3, 8.0), 60, 1)
    }

    /// Two-dimensional grid: 20 times, 10 log points per axis.
    pub fn reduced_2d() -> Self {
        Self::log((1e-3, 10.0), 20, (1e-3, 8.0), 10, 2)
    }

    pub fn n(&self) -> usize {
        self.points.first().map_or(0, |p| p.len())
    }

    pub fn size(&self) -> usize {
        self.t.len() * self.points.len() * self.points.len()
    }

    pub fn summary(&self) -> GridSummary {
        let fold = |v: &mut dyn Iterator<Item = f64>| v.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
        GridSummary {
            n: self.n(),
            t_count: self.t.len(),
            t_range: fold(&mut self.t.iter().copied()),
            point_count: self.points.len(),
            coord_range: fold(&mut self.points.iter().flatten().copied()),
            evaluations: self.size(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSummary {
    pub n: usize,
    pub t_count: usize,
    pub t_range: (f64, f64),
    pub point_count: usize,
    pub coord_range: (f64, f64),
    pub evaluations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorstPoint {
    pub t: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateFit {
    pub c: f64,
    /// `ln C(c) = sup (ln|K| - ln E_c)`; `+∞` when the envelope vanishes where the kernel does not
    pub ln_constant: f64,
    pub constant: f64,
    pub worst: Option<WorstPoint>,
}

/// Outcome of [`fit_bound_constants`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub claim_id: String,
    pub grid: GridSummary,
    pub candidates: Vec<CandidateFit>,
    pub best_c: f64,
    pub best_constant: f64,
    pub ln_best_constant: f64,
    pub worst_point: Option<WorstPoint>,
    pub violated: bool,
}

#[derive(Clone)]
struct Acc {
    ln_c: Vec<f64>,
    at: Vec<Option<(usize, usize, usize)>>,
}

impl Acc {
    fn new(m: usize) -> Self {
        Self { ln_c: vec![f64::NEG_INFINITY; m], at: vec![None; m] }
    }

    fn merge(mut self, other: Self) -> Self {
        for i in 0..self.ln_c.len() {
            if other.ln_c[i] > self.ln_c[i] || (other.ln_c[i].is_nan() && !self.ln_c[i].is_nan()) {
                self.ln_c[i] = other.ln_c[i];
                self.at[i] = other.at[i];
            }
        }
        self
    }
}

/// Fits `C(c) = sup_grid |K| / E_c` for every candidate `c` and reports the
/// candidate with the smallest constant.
///
/// `ln_kernel(t, x, y)` returns `ln|K|` (`-∞` for a vanishing kernel) and
/// `ln_envelope(c, t, x, y)` returns `ln E_c`. Both are evaluated in log form
/// so grid corners where either side underflows are compared exactly.
/// `violated` is set only when no candidate yields a finite constant.
pub fn fit_bound_constants<K, E>(
    claim_id: &str,
    ln_kernel: K,
    ln_envelope: E,
    grid: &SweepGrid,
    c_candidates: &[f64],
) -> Result<BoundReport>
where
    K: Fn(f64, &[f64], &[f64]) -> Result<f64> + Sync,
    E: Fn(f64, f64, &[f64], &[f64]) -> f64 + Sync,
{
    if grid.t.is_empty() || grid.points.is_empty() {
        return Err(usage("sweep grid is empty"));
    }
    if c_candidates.is_empty() || c_candidates.iter().any(|c| !(*c > 0.0)) {
        return Err(usage("c candidates must be a non-empty list of positive numbers"));
    }
    let m = c_candidates.len();
    let np = grid.points.len();
    let acc = (0..grid.t.len() * np)
        .into_par_iter()
        .map(|ti_xi| -> Result<Acc> {
            let (ti, xi) = (ti_xi / np, ti_xi % np);
            let t = grid.t[ti];
            let x = &grid.points[xi];
            let mut acc = Acc::new(m);
            for (yi, y) in grid.points.iter().enumerate() {
                let lk = ln_kernel(t, x, y)?;
                if lk == f64::NEG_INFINITY {
                    continue;
                }
                for (ci, &c) in c_candidates.iter().enumerate() {
                    let le = ln_envelope(c, t, x, y);
                    let mut ratio = lk - le;
                    if ratio.is_nan() {
                        ratio = f64::INFINITY;
                    }
                    if ratio > acc.ln_c[ci] {
                        acc.ln_c[ci] = ratio;
                        acc.at[ci] = Some((ti, xi, yi));
                    }
                }
            }
            Ok(acc)
        })
        .try_reduce(|| Acc::new(m), |a, b| Ok(a.merge(b)))?;

    let point = |at: Option<(usize, usize, usize)>| {
        at.map(|(ti, xi, yi)| WorstPoint { t: grid.t[ti], x: grid.points[xi].clone(), y: grid.points[yi].clone() })
    };
    let candidates: Vec<CandidateFit> = c_candidates
        .iter()
        .enumerate()
        .map(|(i, &c)| CandidateFit {
            c,
            ln_constant: acc.ln_c[i],
            constant: acc.ln_c[i].exp(),
            worst: point(acc.at[i]),
        })
        .collect();
    let best = candidates
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.ln_constant.total_cmp(&b.1.ln_constant))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let violated = candidates.iter().all(|c| !c.ln_constant.is_finite() && c.ln_constant != f64::NEG_INFINITY);
    Ok(BoundReport {
        claim_id: claim_id.to_string(),
        grid: grid.summary(),
        best_c: candidates[best].c,
        best_constant: candidates[best].constant,
        ln_best_constant: candidates[best].ln_constant,
        worst_point: candidates[best].worst.clone(),
        candidates,
        violated,
    })
}
