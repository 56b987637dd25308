use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Single-mode Gaussian state `|alpha>` with `alpha = |alpha| e^{i phi}` and
/// input quadrature noise `noise0` (1 for a coherent state).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianStateSpec {
    amplitude: f64,
    phase: f64,
    noise0: f64,
}

impl GaussianStateSpec {
    pub fn new(amplitude: f64, phase: f64, noise0: f64) -> Result<Self> {
        if !(amplitude.is_finite() && amplitude >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "alpha_abs",
                value: amplitude,
                reason: "must be finite and >= 0",
            });
        }
        if !phase.is_finite() {
            return Err(Error::InvalidParameter {
                name: "phi_rad",
                value: phase,
                reason: "must be finite",
            });
        }
        if !(noise0.is_finite() && noise0 > 0.0) {
            return Err(Error::InvalidParameter {
                name: "noise0",
                value: noise0,
                reason: "must be finite and > 0",
            });
        }
        Ok(Self {
            amplitude,
            phase,
            noise0,
        })
    }

    pub fn coherent(amplitude: f64, phase: f64) -> Result<Self> {
        Self::new(amplitude, phase, 1.0)
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    pub fn noise0(&self) -> f64 {
        self.noise0
    }

    pub fn is_coherent(&self) -> bool {
        self.noise0 == 1.0
    }
}

/// Input wavefunction
/// `(2 / (pi dE0^2))^{1/4} exp(-(E - |alpha| cos phi)^2 / dE0^2) exp(-i delta0)`
/// with `delta0 = sin phi (|alpha|^2 cos phi - 2 |alpha| E)`.
pub fn gaussian_input(state: &GaussianStateSpec, e: f64) -> Complex64 {
    EvolvedGaussian::new(state, 0.0).amplitude_at(e)
}

/// Quadrature noise after a phase `theta`:
/// `sin^2 theta / dE0^2 + cos^2 theta dE0^2`.
pub fn evolve_noise(state: &GaussianStateSpec, theta: f64) -> f64 {
    // written so that dE0^2 = 1 gives exactly 1
    let s = theta.sin();
    let n0 = state.noise0;
    n0 + s * s * (n0.recip() - n0)
}

/// Quantum Gouy phase `arctan(tan theta / dE0^2)`, unwrapped to be
/// continuous in `theta` with `Gouy(0) = 0`.
///
/// `atan2(sin theta, dE0^2 cos theta)` lies in the same quadrant as `theta`,
/// so the branch is the one within `pi/2` of `theta`; at `theta = m pi / 2`
/// the result is `theta` itself.
pub fn gouy_phase(state: &GaussianStateSpec, theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    let principal = s.atan2(state.noise0 * c);
    let d = principal - theta;
    theta + (d - TAU * (d / TAU).round())
}

/// Closed-form Gaussian state after accumulated phase `theta`.
///
/// The wavefunction is
/// `(2 / (pi dE^2))^{1/4} e^{i Gouy/2} e^{-i delta} exp(-(1/dE^2 + i chirp)(E - c)^2)`
/// with `c = |alpha| cos(phi + theta)`,
/// `delta = sin(phi + theta) (|alpha|^2 cos(phi + theta) - 2 |alpha| E)` and
/// `chirp = sin theta cos theta (1 - dE0^4) / (sin^2 theta + dE0^4 cos^2 theta)`.
/// The chirp vanishes for coherent states and at `theta = m pi / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolvedGaussian {
    pub theta: f64,
    pub noise: f64,
    pub gouy: f64,
    pub center: f64,
    pub chirp: f64,
    /// `|alpha| sin(phi + theta)`, the conjugate-quadrature displacement.
    pub momentum: f64,
}

impl EvolvedGaussian {
    pub fn new(state: &GaussianStateSpec, theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        let n0 = state.noise0;
        let chirp = if n0 == 1.0 {
            0.0
        } else {
            s * c * (1.0 - n0 * n0) / (s * s + n0 * n0 * c * c)
        };
        let (ps, pc) = (state.phase + theta).sin_cos();
        Self {
            theta,
            noise: evolve_noise(state, theta),
            gouy: gouy_phase(state, theta),
            center: state.amplitude * pc,
            chirp,
            momentum: state.amplitude * ps,
        }
    }

    /// `(a, b)` with `delta(E) = a + b E`.
    pub fn delta_coefficients(&self) -> (f64, f64) {
        (self.momentum * self.center, -2.0 * self.momentum)
    }

    pub fn amplitude_at(&self, e: f64) -> Complex64 {
        let (a, b) = self.delta_coefficients();
        let delta = a + b * e;
        let x = e - self.center;
        let envelope = (2.0 / (PI * self.noise)).powf(0.25) * (-x * x / self.noise).exp();
        let phase = 0.5 * self.gouy - delta - self.chirp * x * x;
        Complex64::from_polar(envelope, phase)
    }
}

/// Pointwise closed-form evolved wavefunction `Psi(E; theta)`.
pub fn evolved_gaussian(state: &GaussianStateSpec, theta: f64, e: f64) -> Complex64 {
    EvolvedGaussian::new(state, theta).amplitude_at(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    fn state(a: f64, phi: f64, n0: f64) -> GaussianStateSpec {
        GaussianStateSpec::new(a, phi, n0).unwrap()
    }

    fn trapezoid_norm(f: impl Fn(f64) -> Complex64, lo: f64, hi: f64, m: usize) -> f64 {
        let h = (hi - lo) / (m - 1) as f64;
        (0..m)
            .map(|i| {
                let w = if i == 0 || i == m - 1 { 0.5 } else { 1.0 };
                w * f(lo + i as f64 * h).norm_sqr()
            })
            .sum::<f64>()
            * h
    }

    #[test]
    fn validation() {
        assert!(GaussianStateSpec::new(-1.0, 0.0, 1.0).is_err());
        assert!(GaussianStateSpec::new(1.0, f64::NAN, 1.0).is_err());
        assert!(GaussianStateSpec::new(1.0, 0.0, 0.0).is_err());
        assert!(GaussianStateSpec::coherent(2.0, 0.3).unwrap().is_coherent());
    }

    #[test]
    fn input_special_cases() {
        // |alpha| = 0: real, centred at zero
        let sq = state(0.0, 1.1, 0.5);
        for e in [-1.0, 0.0, 0.6] {
            let v = gaussian_input(&sq, e);
            assert!(v.im.abs() < 1e-16);
            assert!((v.re - gaussian_input(&sq, -e).re).abs() < 1e-16);
        }
        // phi = 0: real Gaussian centred at |alpha|
        let c = state(1.5, 0.0, 1.0);
        let peak = gaussian_input(&c, 1.5);
        assert!(peak.im == 0.0);
        assert!((peak.re - (2.0 / PI).powf(0.25)).abs() < 1e-15);
        assert!(gaussian_input(&c, 1.4).re < peak.re);
    }

    #[test]
    fn input_is_normalised() {
        let st = state(2.0, 0.7, 1.5);
        let norm = trapezoid_norm(|e| gaussian_input(&st, e), -12.0, 12.0, 4001);
        assert!((norm - 1.0).abs() < 1e-12, "{norm}");
    }

    #[test]
    fn noise_values() {
        assert_eq!(evolve_noise(&state(1.0, 0.0, 1.0), 0.77), 1.0);
        assert!((evolve_noise(&state(1.0, 0.0, 0.5), FRAC_PI_2) - 2.0).abs() < 1e-15);
        assert!((evolve_noise(&state(1.0, 0.0, 1.5), PI) - 1.5).abs() < 1e-15);
    }

    #[test]
    fn gouy_values() {
        let coh = state(1.0, 0.0, 1.0);
        for th in [0.0, 0.3, 1.7, 3.2, 7.9, 20.0, -2.0] {
            assert!((gouy_phase(&coh, th) - th).abs() < 1e-13);
        }
        for n0 in [0.5, 1.5, 3.0] {
            assert!((gouy_phase(&state(0.0, 0.0, n0), FRAC_PI_2) - FRAC_PI_2).abs() < 1e-15);
        }
        let g = gouy_phase(&state(0.0, 0.0, 2.0), PI / 4.0);
        assert!((g - 0.5f64.atan()).abs() < 1e-15);
        assert!((g - 0.4636476).abs() < 1e-7);
    }

    #[test]
    fn identity_at_zero_phase() {
        let st = state(1.3, -0.4, 0.7);
        let ev = EvolvedGaussian::new(&st, 0.0);
        assert_eq!(ev.chirp, 0.0);
        assert_eq!(ev.gouy, 0.0);
        for e in [-1.0, 0.2, 2.5] {
            assert_eq!(evolved_gaussian(&st, 0.0, e), gaussian_input(&st, e));
        }
        let (a, b) = ev.delta_coefficients();
        let phi: f64 = -0.4;
        assert!((a - phi.sin() * 1.3 * 1.3 * phi.cos()).abs() < 1e-15);
        assert!((b + 2.0 * 1.3 * phi.sin()).abs() < 1e-15);
    }

    #[test]
    fn coherent_envelope_translates() {
        let st = state(2.0, 0.3, 1.0);
        let theta = 1.1;
        let c = 2.0 * (0.3f64 + theta).cos();
        for x in [-1.0, -0.2, 0.0, 0.5, 1.3] {
            let moved = evolved_gaussian(&st, theta, c + x).norm();
            let base = gaussian_input(&state(0.0, 0.0, 1.0), x).norm();
            assert!((moved - base).abs() < 1e-15);
        }
    }

    proptest! {
        #[test]
        fn noise_bounded_and_periodic(n0 in 0.05f64..20.0, theta in -20.0f64..20.0) {
            let st = state(0.0, 0.0, n0);
            let v = evolve_noise(&st, theta);
            let (lo, hi) = (n0.min(1.0 / n0), n0.max(1.0 / n0));
            prop_assert!(v >= lo * (1.0 - 1e-14) && v <= hi * (1.0 + 1e-14));
            prop_assert!((evolve_noise(&st, theta + PI) - v).abs() < 1e-12 * hi);
        }

        #[test]
        fn gouy_offset_bounded_and_pi_periodic(n0 in 0.05f64..20.0, theta in -20.0f64..20.0) {
            let st = state(0.0, 0.0, n0);
            let d = gouy_phase(&st, theta) - theta;
            prop_assert!(d.abs() < FRAC_PI_2);
            let d2 = gouy_phase(&st, theta + PI) - (theta + PI);
            prop_assert!((d - d2).abs() < 1e-9);
        }

        #[test]
        fn gouy_monotone(n0 in 0.1f64..10.0, theta in -10.0f64..10.0) {
            let st = state(0.0, 0.0, n0);
            prop_assert!(gouy_phase(&st, theta + 1e-3) > gouy_phase(&st, theta));
        }

        #[test]
        fn evolved_stays_normalised(a in 0.0f64..3.0, phi in -3.2f64..3.2, n0 in 0.33f64..3.0, theta in -7.0f64..7.0) {
            let st = state(a, phi, n0);
            let norm = trapezoid_norm(|e| evolved_gaussian(&st, theta, e), -15.0, 15.0, 3001);
            prop_assert!((norm - 1.0).abs() < 1e-10);
        }
    }
}
