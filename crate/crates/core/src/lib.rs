//! Symplectic multirate GARK integration for additively partitioned
//! Hamiltonian systems.

pub mod cli;
pub mod composition;
pub mod conditions;
pub mod diagnostics;
mod error;
pub mod integrators;
pub mod systems;
pub mod tableau;

pub use error::{Error, Result};
