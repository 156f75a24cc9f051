//! Single-track vehicle dynamics modeled three ways: a white-box linear
//! tire ODE, a black-box neural ODE and a hybrid universal differential
//! equation (UDE). Reference data comes from a nonlinear drift model with
//! Pacejka tires; learned models are fit with multiple shooting and ADAM.
//!
//! All numerical code is generic over [`Scalar`] (`f32` or `f64`). The
//! aliases at the crate root pin the `f64` instantiations used by the
//! data pipeline and the command-line tool.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod dynamics;
pub mod error;
pub mod eval;
pub mod nn;
pub mod scalar;
pub mod scaler;
pub mod solver;
pub mod training;
pub mod vehicle;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Reference parameters of the test vehicle in double precision.
pub type VehicleParams = vehicle::VehicleParams<f64>;
pub type TireCoefficients = vehicle::TireCoefficients<f64>;
pub type DriftState = vehicle::DriftState<f64>;
pub type SingleTrackState = vehicle::SingleTrackState<f64>;
pub type ExogenousInput = vehicle::ExogenousInput<f64>;
pub type MlpParams = nn::MlpParams<f64>;
pub type Trajectory = solver::Trajectory<f64>;
pub type TimeGrid = solver::TimeGrid<f64>;
pub type ZScoreScaler = scaler::ZScoreScaler<f64>;

/// Single-precision variants, mostly useful for cheap inference.
pub type MlpParams32 = nn::MlpParams<f32>;
pub type Trajectory32 = solver::Trajectory<f32>;
pub type ZScoreScaler32 = scaler::ZScoreScaler<f32>;
