//! Hermite-function approximation of almost time- and band-limited functions.
//!
//! The crate evaluates orthonormal Hermite functions to large order, measures
//! their WKB asymptotics against explicit envelopes, compares the
//! Christoffel–Darboux projection kernel with the sinc kernel, and computes
//! truncated (optionally dilated) Hermite projections together with the
//! closed-form error bounds they are expected to satisfy.

// Negated comparisons reject NaN inputs in the precondition gates.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod error;
pub mod expansion;
pub mod hermite;
pub mod kernel;
pub mod quadrature;
pub mod wkb;

pub use error::{Error, Result};
pub use hermite::{
    hermite_eval, hermite_eval_scaled, hermite_eval_slice, hermite_zero_value, ode_residual, Hermite,
    HermiteRecurrence, HermiteSlice, HermiteValue,
};

/// Library version, echoed in experiment manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
