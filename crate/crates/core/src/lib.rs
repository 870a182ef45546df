//! Randomized shifted-QR eigensolver for complex matrices.
//!
//! The pipeline: random Hessenberg conjugation, a shift search driven by
//! spectral-distance estimates from implicit QR iterations, decoupling,
//! deflation, and recursion on the resulting diagonal blocks.
//!
//! The solver runs in hardware double precision. The [`verify`] module holds
//! oracles built on software extended precision that share no code with the
//! solver path.

// `!(x > 0.0)` is used on purpose so that NaN lands on the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
pub mod battery;
pub mod deflation;
pub mod distspec;
pub mod driver;
pub mod error;
pub mod hessenberg;
pub mod iqr;
pub mod matrix;
pub mod oneeig;
pub mod scalar;
pub mod verify;

pub use error::{Error, Result};
pub use matrix::{ComplexMatrix, HessenbergMatrix, RngStream};
pub use num_complex::Complex64;
