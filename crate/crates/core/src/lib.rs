//! Exact lattice tools for unit-group and sublattice recovery.

#![allow(clippy::needless_range_loop)]

pub mod buchmann_pohst;
pub mod cyclotomic;
pub mod error;
pub mod estimator;
pub mod fixed;
pub mod interval;
pub mod lattice;
pub mod linalg;
pub mod recovery;
pub mod reduction;
pub mod ring;
pub mod sampler;

pub use error::{Error, Result};
pub use fixed::FixedPointVector;
pub use lattice::{BasisMatrix, MatrixJson, NormMode, NormValue};
