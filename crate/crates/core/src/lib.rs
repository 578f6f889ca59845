//! Finite/fixed-time stable optimization flows.
//!
//! Exponentially stable dynamics ẋ = F(x) — gradient flows and primal-dual
//! flows of proximal augmented / generalized Lagrangians — are converted
//! into finite- or fixed-time stable dynamics ẋ = σ(x)F(x) by a
//! state-dependent scaling of the generator. This crate provides the flows,
//! the scalings and their settling-time bounds, an adaptive integrator with
//! settling measurement, empirical certification of the stability
//! constants, reference solvers, and experiment drivers.
//!
//! Numeric code is generic over the scalar type via [`scalar::Scalar`]
//! (`f32` or `f64`); the drivers and reference solvers are `f64`-only.

pub mod acceptance;
pub mod certify;
pub mod cli;
pub mod config;
pub mod error;
pub mod experiments;
pub mod field;
pub mod flows;
pub mod integrator;
pub mod linalg;
pub mod output;
pub mod proximal;
pub mod reference;
pub mod scalar;
pub mod scaling;

pub use error::{FtError, Result};

/// `f64` aliases for the generic building blocks.
pub type Field64 = field::VectorField<f64>;
pub type Mat64 = linalg::Mat<f64>;
pub type Prox64 = proximal::ProxFunction<f64>;
pub type Scaling64 = scaling::ScalingParams<f64>;
pub type Trajectory64 = integrator::Trajectory<f64>;
pub type IntegrateOptions64 = integrator::IntegrateOptions<f64>;
