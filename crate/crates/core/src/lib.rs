//! Comb diagrams over symmetric monoidal categories.
//!
//! Finite combs are explicit representatives of their sliding classes, ∞-combs are
//! memoized stage producers, and both are interpreted in one of three backends:
//! finite functions, integer maps, or exact stochastic matrices.

pub mod backend;
pub mod bundled;
pub mod cartesian;
pub mod cli;
pub mod dsl;
mod error;
pub mod family;
pub mod feedback;
pub mod finite;
pub mod laws;
pub mod random;
pub mod stream;

pub use error::{Error, Result};
