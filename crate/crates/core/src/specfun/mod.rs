//! Special functions: log-gamma, scaled modified Bessel functions and
//! Laguerre polynomials/functions.

mod bessel;
mod gamma;
mod laguerre;
mod nu;

pub use bessel::{bessel_i_scaled, ln_bessel_i_scaled};
pub(crate) use bessel::ln_scaled_unchecked;
pub use gamma::ln_gamma;
pub(crate) use laguerre::fill_functions;
pub use laguerre::{laguerre_function, laguerre_function_nd, laguerre_functions_upto, laguerre_polynomial};
pub(crate) use nu::gamma_scalar;
pub use nu::{MultiIndex, NuVector};
