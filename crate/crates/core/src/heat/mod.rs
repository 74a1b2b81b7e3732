//! Heat kernel of the Laguerre semigroup, its derivative kernels, Gaussian
//! envelopes and the bound-fitting sweeps.

pub mod claims;
mod envelope;
mod fit;
mod kernel;

pub use envelope::{envelope_eval, ln_boundary, ln_gauss, EnvelopeKind, EnvelopeSpec};
pub use fit::{fit_bound_constants, BoundReport, CandidateFit, GridSummary, SweepGrid, WorstPoint};
pub(crate) use kernel::{block_log, Block};
pub use kernel::{
    delta_dt_heat_kernel_1d, delta_heat_kernel_1d, delta_star_dt_heat_kernel_1d, delta_star_heat_kernel_1d,
    dt2_heat_kernel_1d, dt_heat_kernel_1d, heat_kernel_1d, heat_kernel_nd, kernel_1d_log, kernel_log,
    ln_heat_kernel_1d, KernelKind, KernelQuery,
};
