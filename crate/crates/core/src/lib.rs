//! Space-time finite element solver for dynamic poroelasticity.

pub mod assembly;
pub mod cli;
pub mod error;
pub mod linalg;
pub mod mesh;
pub mod problems;
pub mod quadrature;
pub mod spaces;
pub mod study;
pub mod timeslab;

pub use error::{Error, Result};
