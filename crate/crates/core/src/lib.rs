//! Fractional steepest descent on the quadratic energy norm.
//!
//! The crate evaluates order-ν Riemann–Liouville gradients of
//! `E(s) = E_min + η (s − s*)²`, runs the fractional descent iteration over
//! complex arithmetic, and compares the observed convergence with two
//! closed-form trajectory estimates: the exponential-decay estimate and the
//! implicit separated-variables solution of the continuous surrogate.
//!
//! Independent runs (ν sweeps, curve samples, oracle grids) are evaluated in
//! parallel through rayon when the `parallel` feature is enabled.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod claims;
pub mod convergence;
mod dd;
pub mod energy;
pub mod error;
pub mod estimate;
pub mod exec;
pub mod fal;
pub mod fractional;
pub mod presets;
pub mod special;

pub use error::{Error, Result};
pub use special::ComplexScalar;
