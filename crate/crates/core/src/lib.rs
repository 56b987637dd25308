//! Propagation of classical mode amplitudes and Gaussian quantum states of
//! light through separable, longitudinally inhomogeneous waveguides.
//!
//! The classical side integrates `q'' + beta(z)^2 q = 0` for the fundamental
//! pair `(u, v)`, builds the Ermakov-Pinney amplitude `rho` and the
//! accumulated phase `theta`. The quantum side works in the dimensionless
//! optical-field-strength (OFS) representation where only `theta` enters.

pub mod classical;
pub mod error;
pub mod media;
pub mod ode;
pub mod output;
pub mod quantum;
pub mod scenarios;
pub mod verify;

pub use error::{Error, Result};
