use std::f64::consts::FRAC_PI_4;

use num_complex::Complex64;
use rayon::prelude::*;

use super::gaussian::GaussianStateSpec;
use super::kernel::PropagatorKernel;
use crate::error::{Error, Result};

pub const MIN_GRID_POINTS: usize = 64;
pub const DEFAULT_GRID_POINTS: usize = 2048;
/// Largest `|psi|` tolerated at either end of a grid fed to the quadrature.
pub const BOUNDARY_TOLERANCE: f64 = 1e-12;

// the kernel cross phase is reseeded exactly every this many nodes
const RESEED: usize = 64;

/// Uniform grid on `[e_min, e_max]`, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OfsGrid {
    e_min: f64,
    e_max: f64,
    points: usize,
}

impl OfsGrid {
    pub fn new(e_min: f64, e_max: f64, points: usize) -> Result<Self> {
        if !(e_min.is_finite() && e_min < 0.0) {
            return Err(Error::InvalidParameter {
                name: "e_min",
                value: e_min,
                reason: "must be finite and < 0",
            });
        }
        if !(e_max.is_finite() && e_max > 0.0) {
            return Err(Error::InvalidParameter {
                name: "e_max",
                value: e_max,
                reason: "must be finite and > 0",
            });
        }
        if points < MIN_GRID_POINTS {
            return Err(Error::InvalidParameter {
                name: "points",
                value: points as f64,
                reason: "must be >= 64",
            });
        }
        Ok(Self {
            e_min,
            e_max,
            points,
        })
    }

    pub fn symmetric(e_max: f64, points: usize) -> Result<Self> {
        Self::new(-e_max, e_max, points)
    }

    /// `[-E, E]` with `E = |alpha| + 6 max(dE0, 1/dE0)` and 2048 points.
    pub fn for_state(state: &GaussianStateSpec) -> Self {
        let width = state.noise0().sqrt();
        let e_max = state.amplitude() + 6.0 * width.max(width.recip());
        Self::symmetric(e_max, DEFAULT_GRID_POINTS).expect("positive extent")
    }

    pub fn e_min(&self) -> f64 {
        self.e_min
    }

    pub fn e_max(&self) -> f64 {
        self.e_max
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn spacing(&self) -> f64 {
        (self.e_max - self.e_min) / (self.points - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        if i + 1 == self.points {
            self.e_max
        } else {
            self.e_min + i as f64 * self.spacing()
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.points).map(|i| self.node(i))
    }

    /// Points needed so the kernel phase changes by less than `pi/4` between
    /// neighbouring quadrature nodes anywhere on the grid.
    pub fn required_points(&self, theta: f64) -> Result<usize> {
        let kernel = PropagatorKernel::new(theta);
        kernel.check()?;
        let (s, c) = theta.sin_cos();
        let reach = self.e_min.abs().max(self.e_max);
        // max over the square of |d/dE0 phase| = |2 cos(th) E0 - 2 E| / |sin th|
        let max_rate = 2.0 * reach * (c.abs() + 1.0) / s.abs();
        let h_max = FRAC_PI_4 / max_rate;
        Ok(((self.e_max - self.e_min) / h_max).floor() as usize + 2)
    }

    /// This grid, with the point count doubled until it resolves `theta`.
    pub fn resolved_for(&self, theta: f64) -> Result<Self> {
        let need = self.required_points(theta)?;
        let mut g = *self;
        while g.points < need {
            g.points *= 2;
        }
        Ok(g)
    }

    fn trapezoid_weight(&self, i: usize) -> f64 {
        let h = self.spacing();
        if i == 0 || i + 1 == self.points {
            0.5 * h
        } else {
            h
        }
    }
}

/// Wavefunction samples on an [`OfsGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct SampledWavefunction {
    grid: OfsGrid,
    values: Vec<Complex64>,
}

impl SampledWavefunction {
    pub fn new(grid: OfsGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.points() {
            return Err(Error::InvalidParameter {
                name: "values",
                value: values.len() as f64,
                reason: "length must equal the grid point count",
            });
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: OfsGrid, f: impl Fn(f64) -> Complex64) -> Self {
        let values = grid.nodes().map(f).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &OfsGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// `int |psi|^2 dE` by the trapezoidal rule.
    pub fn norm_sqr(&self) -> f64 {
        self.values
            .iter()
            .enumerate()
            .map(|(i, v)| self.grid.trapezoid_weight(i) * v.norm_sqr())
            .sum()
    }

    /// `|| self - other ||_2` on the shared grid.
    pub fn l2_distance(&self, other: &Self) -> f64 {
        assert_eq!(
            self.grid, other.grid,
            "wavefunctions live on different grids"
        );
        self.values
            .iter()
            .zip(&other.values)
            .enumerate()
            .map(|(i, (a, b))| self.grid.trapezoid_weight(i) * (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `|| self - reference || / || reference ||`.
    pub fn relative_l2_error(&self, reference: &Self) -> f64 {
        self.l2_distance(reference) / reference.norm_sqr().sqrt()
    }

    /// `<self | other>` by the trapezoidal rule.
    pub fn inner(&self, other: &Self) -> Complex64 {
        assert_eq!(
            self.grid, other.grid,
            "wavefunctions live on different grids"
        );
        self.values
            .iter()
            .zip(&other.values)
            .enumerate()
            .map(|(i, (a, b))| a.conj() * b * self.grid.trapezoid_weight(i))
            .sum()
    }
}

/// `Psi(E; theta) = int K(E, E0; theta) Psi(E0; 0) dE0` by trapezoidal
/// quadrature, evaluated at every node of the input grid.
///
/// Refuses caustic phases, inputs that do not vanish at the grid ends, and
/// grids too coarse for the kernel oscillation (the error carries the point
/// count that would be accepted; see [`OfsGrid::resolved_for`]).
pub fn propagate_numeric(input: &SampledWavefunction, theta: f64) -> Result<SampledWavefunction> {
    let kernel = PropagatorKernel::new(theta);
    kernel.check()?;
    let grid = input.grid;
    let boundary_abs = input.values[0]
        .norm()
        .max(input.values[grid.points - 1].norm());
    if boundary_abs >= BOUNDARY_TOLERANCE {
        return Err(Error::GridTooNarrow { boundary_abs });
    }
    let required_points = grid.required_points(theta)?;
    if grid.points < required_points {
        return Err(Error::UnderResolved {
            theta,
            points: grid.points,
            required_points,
        });
    }

    // K = pref * exp(-i cot E^2) * exp(-i cot E0^2) * exp(i cross E E0)
    let cot = kernel.cot();
    let cross = kernel.cross();
    let h = grid.spacing();
    let nodes: Vec<f64> = grid.nodes().collect();
    let weighted: Vec<Complex64> = input
        .values
        .iter()
        .enumerate()
        .map(|(k, psi)| {
            let e0 = nodes[k];
            psi * grid.trapezoid_weight(k) * Complex64::from_polar(1.0, -cot * e0 * e0)
        })
        .collect();

    let values = nodes
        .par_iter()
        .map(|&e| {
            let step = Complex64::from_polar(1.0, cross * e * h);
            let mut acc = Complex64::new(0.0, 0.0);
            let mut rot = Complex64::new(1.0, 0.0);
            for (k, g) in weighted.iter().enumerate() {
                if k % RESEED == 0 {
                    rot = Complex64::from_polar(1.0, cross * e * nodes[k]);
                }
                acc += g * rot;
                rot *= step;
            }
            kernel.prefactor() * Complex64::from_polar(1.0, -cot * e * e) * acc
        })
        .collect();
    Ok(SampledWavefunction { grid, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{evolved_gaussian, fock_wavefunction, gaussian_input};

    #[test]
    fn grid_validation() {
        assert!(OfsGrid::new(0.0, 1.0, 128).is_err());
        assert!(OfsGrid::new(-1.0, -0.5, 128).is_err());
        assert!(OfsGrid::new(-1.0, 1.0, 63).is_err());
        let g = OfsGrid::symmetric(5.0, 101).unwrap();
        assert_eq!(g.node(0), -5.0);
        assert_eq!(g.node(100), 5.0);
        assert!((g.node(50)).abs() < 1e-15);
        assert!((g.spacing() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn default_grid_extent() {
        let g = OfsGrid::for_state(&GaussianStateSpec::new(2.0, 0.0, 0.25).unwrap());
        assert!((g.e_max() - 14.0).abs() < 1e-12);
        assert_eq!(g.points(), DEFAULT_GRID_POINTS);
        let g = OfsGrid::for_state(&GaussianStateSpec::coherent(0.0, 0.0).unwrap());
        assert!((g.e_max() - 6.0).abs() < 1e-12);
    }

    #[test]
    fn resolution_is_enforced() {
        let st = GaussianStateSpec::new(0.0, 0.0, 1.0).unwrap();
        let coarse = OfsGrid::symmetric(8.0, 64).unwrap();
        let input = SampledWavefunction::from_fn(coarse, |e| gaussian_input(&st, e));
        let err = propagate_numeric(&input, 0.3).unwrap_err();
        let Error::UnderResolved {
            required_points, ..
        } = err
        else {
            panic!("{err:?}")
        };
        let fixed = coarse.resolved_for(0.3).unwrap();
        assert!(fixed.points() >= required_points);
        let input = SampledWavefunction::from_fn(fixed, |e| gaussian_input(&st, e));
        assert!(propagate_numeric(&input, 0.3).is_ok());
    }

    #[test]
    fn narrow_grid_and_caustic_rejected() {
        let st = GaussianStateSpec::coherent(0.0, 0.0).unwrap();
        let narrow = OfsGrid::symmetric(2.0, 2048).unwrap();
        let input = SampledWavefunction::from_fn(narrow, |e| gaussian_input(&st, e));
        assert!(matches!(
            propagate_numeric(&input, 1.0),
            Err(Error::GridTooNarrow { .. })
        ));
        let wide = OfsGrid::for_state(&st);
        let input = SampledWavefunction::from_fn(wide, |e| gaussian_input(&st, e));
        assert!(matches!(
            propagate_numeric(&input, std::f64::consts::PI),
            Err(Error::Caustic { .. })
        ));
    }

    #[test]
    fn ground_state_picks_up_half_phase() {
        let grid = OfsGrid::symmetric(6.0, 2048).unwrap();
        let input = SampledWavefunction::from_fn(grid, |e| fock_wavefunction(0, e).unwrap());
        let out = propagate_numeric(&input, 0.5).unwrap();
        let expected = SampledWavefunction::from_fn(grid, |e| {
            Complex64::from_polar(1.0, 0.25) * fock_wavefunction(0, e).unwrap()
        });
        assert!(out.relative_l2_error(&expected) < 1e-6);
        assert!((out.norm_sqr() - input.norm_sqr()).abs() < 1e-6);
    }

    #[test]
    fn squeezed_state_matches_closed_form() {
        let st = GaussianStateSpec::new(2.0, 0.7, 0.5).unwrap();
        for theta in [0.3, 1.0, 2.8, 4.0] {
            let grid = OfsGrid::for_state(&st).resolved_for(theta).unwrap();
            let input = SampledWavefunction::from_fn(grid, |e| gaussian_input(&st, e));
            let out = propagate_numeric(&input, theta).unwrap();
            let exact = SampledWavefunction::from_fn(grid, |e| evolved_gaussian(&st, theta, e));
            let err = out.relative_l2_error(&exact);
            assert!(err < 1e-6, "theta {theta}: {err:e}");
        }
    }
}
