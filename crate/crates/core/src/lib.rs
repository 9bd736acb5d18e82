//! Time-optimal control synthesis for discrete integrator chains.
//!
//! The crate provides the bounded time-optimal feedback law for an
//! `m`-th order discrete integrator chain, the combinatorial and geometric
//! machinery behind it, a tracking differentiator built on the law with a
//! filter factor, and predictive compensation of the extracted signals.
//!
//! Numeric code is generic over [`Scalar`]; the aliases below fix the scalar
//! to `f64` for simulation or to [`BigRational`] for exact checks.

// Negated comparisons are how parameter checks reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod combinatorics;
pub mod compensation;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod kernel;
pub mod metrics;
pub mod scalar;
pub mod signal;
pub mod tracking;
pub mod verify;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use num_rational::BigRational;

pub type Params = kernel::SystemParams<f64>;
pub type StateF64 = kernel::State<f64>;
pub type PlantF64 = geometry::Plant<f64>;
pub type ExactParams = kernel::SystemParams<BigRational>;
pub type ExactState = kernel::State<BigRational>;
pub type ExactPlant = geometry::Plant<BigRational>;
pub type Tracker = tracking::TrackerConfig<f64>;
