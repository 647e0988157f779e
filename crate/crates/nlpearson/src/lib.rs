//! Nonlocal Pearson diffusions: spectral densities, inverse-subordinator
//! relaxation, Monte Carlo simulation and a command line front-end.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bernstein;
pub mod cli;
pub mod error;
pub mod interp;
pub mod laplace;
pub mod mittag_leffler;
pub mod montecarlo;
pub mod pearson;
pub mod quad;
pub mod relaxation;
pub mod solver;
pub mod special;
pub mod spectral;
pub mod subordination;

pub use error::{Error, Result};
