//! Scale-by-scale energy budget diagnostics for density-dependent
//! incompressible flow on the periodic torus.
//!
//! The crate is generic over the real scalar type (see [`Scalar`]); the
//! `*64` and `*32` aliases below fix it to `f64` or `f32`.

// `!(x > 0.0)` style checks are meant to reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod besov;
pub mod budget;
pub mod error;
pub mod estimates;
pub mod factory;
pub mod khm;
pub mod scalar;
pub mod solver;
pub mod spectral;

pub use budget::SolutionState;
pub use error::{Error, Result};
pub use scalar::Scalar;
pub use spectral::{CutoffKind, CutoffProfile, Field, TorusGrid};

pub type Field64 = Field<f64>;
pub type Field32 = Field<f32>;
pub type State64 = SolutionState<f64>;
pub type State32 = SolutionState<f32>;
