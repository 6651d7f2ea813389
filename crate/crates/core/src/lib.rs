//! Spectral lab for observability-based reconstruction of 1D semilinear
//! waves and for Schrodinger-to-plate observability transfer.
//!
//! Everything lives on the Dirichlet interval (0, L) with the sine
//! eigenbasis; states are coefficient pairs (u, v) in X^sigma.

pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod observability;
pub mod plate;
pub mod reconstruction;
pub mod sampling;
pub mod spectral;
pub mod suite;

pub use error::{Error, Result};
