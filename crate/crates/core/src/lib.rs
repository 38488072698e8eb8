//! Finite-volume solver for the two-layer quasi-geostrophic equations with
//! optional linear and nonlinear differential filtering.

// Validation uses `!(a <= b)` on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod cli;
pub mod config;
pub mod error;
pub mod filter;
pub mod fvops;
pub mod grid;
pub mod linsolve;
pub mod mms;
pub mod physics;
pub mod timeloop;

pub use error::{QgError, Result};
