//! Numerical toolkit for the Laguerre operator
//! `L_ν = Σ_j (-∂_j² + x_j² + (ν_j² - 1/4)/x_j²)` on `(0, ∞)^n`.

// `!(x > 0)` is how argument checks reject NaN along with the bad values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod grid;
pub mod heat;
pub mod operators;
pub mod quadrature;
pub mod scalar;
pub mod spectral;
pub mod specfun;
pub mod verify;
pub mod weights;

pub use error::{Error, Result};
pub use scalar::{Real, SignedLog};
pub use specfun::{MultiIndex, NuVector};

pub type NuVectorF64 = NuVector<f64>;
pub type NuVectorF32 = NuVector<f32>;
