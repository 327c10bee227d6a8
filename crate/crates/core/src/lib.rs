//! Spectral integrated neural networks for transient heat conduction and wave
//! propagation in three dimensions.

pub mod error;
pub mod geometry;
pub mod inverse;
pub mod metrics;
pub mod net;
pub mod problem;
pub mod quadrature;
pub mod residual;
pub mod run;
pub mod train;
pub mod verify;

pub use error::{Result, SinnError};
