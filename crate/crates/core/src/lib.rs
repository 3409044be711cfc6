//! Fractional Hartree equation laboratory.
//!
//! Pseudospectral propagation of `i∂_t φ = (-Δ)^σ φ + μλ (K ∗ |φ|²) φ` with
//! Riesz or regularized kernels, mass-critical ground states, exact few-boson
//! propagation with reduced density matrices, and the parameter studies that
//! measure convergence rates between them.

// Negated comparisons are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod ground_state;
pub mod io;
pub mod many_body;
pub mod params;
pub mod spectral;
pub mod studies;
pub mod verify;

pub use error::{Error, Result};
pub use params::{HartreeParams, Sign};
pub use spectral::{Field, Grid};

pub use num_complex::Complex64 as C64;
