//! Index computations for Dirac operators perturbed by a bundle endomorphism.
//!
//! The index localizes to the singular points of the perturbation. This crate
//! builds the Clifford data at such points, evaluates local indices
//! combinatorially and with two independent discretizations, and runs global
//! spectral simulations on the circle and the flat torus.

pub mod clifford;
pub mod error;
pub mod geometry_examples;
pub mod instances;
pub mod linalg;
pub mod local_index;
pub mod perturbation;
pub mod sampling;
pub mod sparse;
pub mod spectral_sim;

pub use error::{Error, Result};
