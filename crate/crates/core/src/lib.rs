//! Monomial norms on nested egg domains, box covers and resolutions of
//! monomial ideals, and commutator diagnostics for the resulting weighted
//! shifts.

pub mod cli;
pub mod error;
pub mod lattice;
pub mod operators;
pub mod report;
pub mod resolution;
pub mod weights;

pub use error::{Error, Result};
