//! Numerical laboratory for chordal SLE(κ,Λ) in the annulus.
//!
//! Modules, bottom-up:
//! - [`special_fn`]: annulus theta functions, Loewner kernels, zeta functions.
//! - [`correlations`]: Green's functions and Gaussian free field correlators.
//! - [`coulomb_gas`]: Coulomb gas correlators, one-leg partition functions and
//!   the SLE drift they induce.
//! - [`screening`]: screening-charge partition functions and PDE residuals.
//! - [`loewner`]: stochastic annulus Loewner flow and trace reconstruction.
//! - [`martingale_mc`]: Monte Carlo martingale tests of bosonic observables.
//! - [`selftest`] and [`cli`]: the command-line front end.

// Range checks are written `!(x > 0.0)` on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub use error::{Result, SleError};
pub mod cli;
pub mod correlations;
pub mod coulomb_gas;
pub mod loewner;
pub mod martingale_mc;
pub mod screening;
pub mod selftest;
pub mod special_fn;
