//! Numerical laboratory for Lévy-type (Feller) processes: symbols,
//! Blumenthal–Getoor indices, path simulation and fractal dimension
//! estimates of path images.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod fractal;
pub mod indices;
pub mod numeric;
pub mod simulate;
pub mod symbol;
pub mod verify;

pub use error::{Error, Result};
