//! Computable pieces of the Tamarkin-category distance theory.
//!
//! * [`barcode`] models objects and morphisms of the Tamarkin category of a
//!   point as barcodes and masked matrices.
//! * [`relations`] verifies and searches interleaving and isomorphism
//!   certificates and promotes weak isomorphisms between rigid objects.
//! * [`distances`] computes the three certificate distances exactly.
//! * [`hamexpr`] parses and differentiates Hamiltonian expressions.
//! * [`numerics`] integrates Hamiltonian flows and evaluates energy bounds.
//! * [`lab`] checks the stability statements end to end in the point model.

pub mod barcode;
pub mod distances;
pub mod hamexpr;
pub mod lab;
pub mod numerics;
pub mod relations;
pub mod scalar;

#[cfg(test)]
mod testing;

pub use barcode::{compose, hom_pattern, tau_morphism, translate, Barcode, Field, Interval, Morphism};
pub use scalar::{Extended, Scalar};
