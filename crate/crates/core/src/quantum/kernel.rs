use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Half-width of the exclusion band around the caustics `sin theta = 0`.
pub const CAUSTIC_EPSILON: f64 = 1e-6;

/// Single-mode Mehler propagator at a fixed accumulated phase.
///
/// `K(E, E0) = (i / (pi sin theta))^{1/2}
///     exp(-i [cos theta (E^2 + E0^2) - 2 E E0] / sin theta)`,
/// the resummation of `sum_N Psi_N(E) Psi_N(E0) exp(i (N + 1/2) theta)`.
/// The square root is taken as `exp(i (pi/4 + m pi/2)) / sqrt(pi |sin theta|)`
/// with `m = floor(theta / pi)`: the branch that tends to the identity as
/// `theta -> 0+` and advances by `pi/2` across every caustic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagatorKernel {
    theta: f64,
    near_caustic: bool,
    prefactor: Complex64,
    cot: f64,
    cross: f64,
}

impl PropagatorKernel {
    pub fn new(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        let near_caustic = s.abs() < CAUSTIC_EPSILON;
        let m = (theta / PI).floor();
        let prefactor =
            Complex64::from_polar((PI * s.abs()).sqrt().recip(), FRAC_PI_4 + m * FRAC_PI_2);
        Self {
            theta,
            near_caustic,
            prefactor,
            cot: c / s,
            cross: 2.0 / s,
        }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn near_caustic(&self) -> bool {
        self.near_caustic
    }

    pub(crate) fn check(&self) -> Result<()> {
        if self.near_caustic {
            Err(Error::Caustic {
                theta: self.theta,
                epsilon: CAUSTIC_EPSILON,
            })
        } else {
            Ok(())
        }
    }

    pub(crate) fn prefactor(&self) -> Complex64 {
        self.prefactor
    }

    /// `cot theta`, the coefficient of `-i E^2` and `-i E0^2` in the phase.
    pub(crate) fn cot(&self) -> f64 {
        self.cot
    }

    /// `2 / sin theta`, the coefficient of `+i E E0` in the phase.
    pub(crate) fn cross(&self) -> f64 {
        self.cross
    }

    pub fn value(&self, e: f64, e0: f64) -> Result<Complex64> {
        self.check()?;
        let phase = -self.cot * (e * e + e0 * e0) + self.cross * e * e0;
        Ok(self.prefactor * Complex64::from_polar(1.0, phase))
    }
}

pub fn kernel_value(kernel: &PropagatorKernel, e: f64, e0: f64) -> Result<Complex64> {
    kernel.value(e, e0)
}
