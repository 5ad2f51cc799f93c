//! Numerical engine for the Evans–Hudson flow generated by the Laplacian on
//! flat tori.
//!
//! * [`spectral`]: trigonometric polynomials, derivatives, norms.
//! * [`structure`]: generator, derivation, structure matrix, kernel.
//! * [`fock`]: truncated symmetric Fock space over simple noise paths.
//! * [`flow`]: time-ordered exponentials, Picard series, explicit Fock engine.
//! * [`trace`]: heat-trace and spectral-action recovery.
//! * [`cli`]: configuration, verification suites, report emission.

pub mod cli;
pub mod error;
pub mod flow;
pub mod fock;
pub mod sampling;
pub mod spectral;
pub mod structure;
pub mod trace;

pub use error::{Error, Result};
