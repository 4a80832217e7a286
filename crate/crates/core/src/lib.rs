//! Numerical laboratory for model-uncertainty mean-field stochastic control.
//!
//! The crate is organised bottom-up:
//!
//! * [`measures`]: signed atomic measures, their Fourier transforms and the
//!   Gaussian-weighted `M^(k)` inner products.
//! * [`lawproc`]: law processes `M(t) = L(X(t))`, the Itô–Lévy generator on
//!   Fourier test functions, time derivatives of measure paths.
//! * [`sde`]: particle simulation of controlled mean-field jump diffusions,
//!   performance functionals and derivative processes.
//! * [`bsde`]: linear BSDEs with jumps through the Γ-process representation.
//! * [`game`]: Hamiltonians, first-order residuals and perturbation sweeps for
//!   two-player games with a measure-valued player.
//! * [`consumption`]: the optimal consumption problem under model uncertainty,
//!   end to end.

// Negated float comparisons deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bsde;
pub mod consumption;
pub mod error;
pub mod game;
pub mod lawproc;
pub mod measures;
pub mod output;
pub mod regression;
pub mod sde;

pub use error::{Error, Result};
