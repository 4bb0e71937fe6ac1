//! Variable-exponent Hölder spaces for parabolic equations: the parabolic
//! metric, variable Hölder norms, heat kernels and potentials, extension and
//! mollification, and a finite-difference solver with empirical Schauder
//! constants.

pub mod config;
pub mod error;
pub mod experiments;
pub mod exponents;
pub mod geometry;
pub mod kernels;
pub mod norms;
pub mod potentials;
pub mod regularize;
pub mod solver;

pub use error::{Error, Result};
pub use exponents::VariableExponent;
pub use geometry::{BoundaryPiece, GridDomain, Shape, SpaceTimePoint};
pub use norms::{GridFunction, HolderReport};
