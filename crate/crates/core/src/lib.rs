//! Littlewood-Paley analysis, Besov norms and a pseudo-spectral solver for
//! viscous, non-resistive incompressible MHD on the 2D torus, together with
//! the instrumentation that measures every inequality of the uniqueness
//! argument for that system on pairs of nearby simulated solutions.

pub mod besov;
pub mod estimate;
pub mod inequality;
pub mod mhd;
pub mod error;
pub mod partition;
pub mod random;
pub mod spectral;
pub mod uniqueness;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
