//! Spectral simulator and statistical laboratory for the continuous resonant
//! (CR) system of the 2D cubic nonlinear Schrödinger equation.

// `!(x > 0.0)` is used on purpose so that NaN parameters are rejected too;
// the numeric kernels index several parallel arrays in one loop.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod basis;
pub mod coupling;
pub mod dynamics;
pub mod error;
pub mod lab;
pub mod measures;
pub mod special;
pub mod stats;

pub use error::{Error, Result};
