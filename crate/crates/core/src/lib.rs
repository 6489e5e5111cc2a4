//! Numerical laboratory for the rotationally symmetric p-harmonic flow of
//! maps from the unit disk to the unit sphere, `1 < p < 2`.

pub mod error;
pub mod flow_core;
pub mod ode;
pub mod stationary;
pub mod verifier;
pub mod comparison;
pub mod evolution;
pub mod io;

pub use error::{Error, Result};
