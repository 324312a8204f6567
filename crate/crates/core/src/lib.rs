//! Structured Wasserstein distributionally robust optimization: uncertainty
//! quantification over product ambiguity sets, its lifted convex relaxations,
//! and a self-contained conic solver to evaluate them.

#![allow(
    clippy::needless_range_loop,
    clippy::neg_cmp_op_on_partial_ord,
    clippy::type_complexity
)]

pub mod combinatorics;
pub mod conic;
pub mod distributions;
pub mod error;
pub(crate) mod linalg;
pub mod losses;
pub mod oracles;
pub mod program;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Distribution64 = distributions::DiscreteDistribution<f64>;
pub type Distribution32 = distributions::DiscreteDistribution<f32>;
pub type Loss64 = losses::PolyhedralLoss<f64>;
pub type Loss32 = losses::PolyhedralLoss<f32>;
pub type Program64 = conic::ConicProgram<f64>;
pub type Program32 = conic::ConicProgram<f32>;
