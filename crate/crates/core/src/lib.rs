//! Moments of the stationary move-to-front search cost when request
//! probabilities are normalized increments of a γ-stable subordinator.
//!
//! The crate offers three independent routes to the same numbers:
//!
//! * [`analytic`]: exact finite-`n` moments through a hypergeometric identity,
//!   and their `n → ∞` limits with divergence detection;
//! * [`quadrature`]: direct numerical integration of the Laplace-transform
//!   representation of the search cost;
//! * [`montecarlo`]: simulation of the move-to-front chain, plus an exact
//!   stationary sampler based on exponential ages.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod cli;
pub mod montecarlo;
pub mod quadrature;
pub mod special_fn;
pub mod weights;

pub use analytic::{CoefficientTriangle, MomentValue};
pub use montecarlo::{McEstimate, McMethod};
pub use quadrature::QuadratureSpec;
pub use special_fn::HypResult;
pub use weights::{PopularityVector, WeightModel};
