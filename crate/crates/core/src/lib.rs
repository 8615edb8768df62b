//! Operator monotone matrix functions and quantitative gap bounds for the
//! Löwner–Heinz inequality on positive matrices.

pub mod bounds;
pub mod cli;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod matfun;
pub mod quadrature;
pub mod report;

pub use error::{Error, Result};
pub use linalg::{HermitianMatrix, OrderWitness, SpectralDecomposition, ToleranceConfig};
pub use quadrature::QuadratureConfig;
