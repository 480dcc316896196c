//! Monte Carlo laboratory for the covariance of rank-selected Gaussian
//! winners on positive-definite quadratic landscapes.
//!
//! The pieces, bottom up:
//!
//! - [`landscape`]: Hessian families and the translated quadratic objective.
//! - [`sampling`]: isotropic mutations, rank-based selection and streaming
//!   covariance of the winners.
//! - [`distributions`]: generalized χ² laws of mutation values and of
//!   winning values.
//! - [`metrics`]: how far H·C is from a multiple of the identity.
//! - [`harness`] and [`cli`]: experiment sweeps and CSV artifacts.

// `!(x >= 0.0)` is used deliberately so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod distributions;
pub mod error;
pub mod harness;
pub mod landscape;
pub mod matrix;
pub mod metrics;
pub mod quadrature;
pub mod sampling;

pub use error::{Error, Result};
pub use landscape::{Hessian, HessianKind, Objective};
pub use matrix::Matrix;
pub use sampling::{CovarianceAccumulator, SampleConfig, SelectionMode, WinnerRecord};
