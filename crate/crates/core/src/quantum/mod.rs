//! Single-mode quantum states in the dimensionless optical-field-strength
//! (OFS) representation.
//!
//! In these units the propagation generator is `-(1/4) d^2/dE^2 + E^2` with
//! spectrum `N + 1/2`, and a state evolves by `exp(+i (N + 1/2) theta)` where
//! `theta` is the classical accumulated phase. Nothing else about the medium
//! enters.

mod fock;
mod gaussian;
mod grid;
mod kernel;

pub use fock::{fock_ladder, fock_propagated, fock_wavefunction, MAX_FOCK_INDEX};
pub use gaussian::{
    evolve_noise, evolved_gaussian, gaussian_input, gouy_phase, EvolvedGaussian, GaussianStateSpec,
};
pub use grid::{
    propagate_numeric, OfsGrid, SampledWavefunction, BOUNDARY_TOLERANCE, DEFAULT_GRID_POINTS,
    MIN_GRID_POINTS,
};
pub use kernel::{kernel_value, PropagatorKernel, CAUSTIC_EPSILON};
