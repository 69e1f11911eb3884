//! Desk-scale numerics for spectrogram concentration with the Gaussian
//! window, phrased in the Bargmann-Fock model.
//!
//! The crate computes weighted densities u_F = |F|^2 e^{-pi |z|^2} of
//! truncated Fock-space functions, their distribution functions and
//! decreasing rearrangements, concentration deficits against the sharp
//! 1 - e^{-|Omega|} bound, distances to the Gaussian extremizer class,
//! second-variation coefficients, sharpness sweeps, localization-operator
//! spectra, and the d-dimensional generalization of the bound.

pub mod battery;
pub mod cli;
pub mod concentration;
pub mod error;
pub mod fock;
pub mod geometry;
pub mod grid;
pub mod highdim;
pub mod report;
pub mod special;
pub mod stability;
pub mod transforms;
pub mod verify;

pub use error::{Error, Result};
