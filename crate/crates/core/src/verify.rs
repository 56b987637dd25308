//! Self-checks run by `qlight verify`: invariants of the classical solution,
//! closed-form noise and Gouy identities, and (at the full level) the
//! quadrature oracles.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::classical::{invariant_value, solve_on_grid, DEFAULT_ABS_TOL};
use crate::error::Result;
use crate::media::{LongitudinalProfile, MediumSpec};
use crate::ode::Tolerances;
use crate::quantum::{
    evolve_noise, evolved_gaussian, fock_propagated, fock_wavefunction, gaussian_input, gouy_phase,
    propagate_numeric, GaussianStateSpec, OfsGrid, SampledWavefunction,
};

/// Grid used for the finite-difference Pinney residual.
pub const PINNEY_GRID_POINTS: usize = 2001;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Fast,
    Full,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl Check {
    /// Passes when `measured < threshold` (NaN fails).
    pub fn below(name: impl Into<String>, measured: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            threshold,
            passed: measured < threshold,
        }
    }
}

pub fn all_passed(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.passed)
}

/// Plain-text pass/fail table.
pub fn format_report(checks: &[Check]) -> String {
    let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    let mut out = String::new();
    for c in checks {
        out.push_str(&format!(
            "{}  {:width$}  measured {:.3e}  threshold {:.1e}\n",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.measured,
            c.threshold,
        ));
    }
    out
}

/// Runs the checks for `medium` integrated at `rel_tol` and the given
/// states (noise 1/2, 1 and 3/2 are always included). `rel_tol` is not
/// range-checked, so a loose tolerance shows up as failed checks.
pub fn run_checks(
    medium: &MediumSpec,
    states: &[GaussianStateSpec],
    rel_tol: f64,
    level: Level,
) -> Result<Vec<Check>> {
    let mut checks = classical_checks(medium, rel_tol)?;
    let mut noise_values = vec![0.5, 1.0, 1.5];
    for st in states {
        if !noise_values.contains(&st.noise0()) {
            noise_values.push(st.noise0());
        }
    }
    checks.extend(closed_form_checks(&noise_values)?);
    if level == Level::Full {
        checks.push(constant_medium_check(medium)?);
        checks.extend(oracle_checks(states)?);
    }
    Ok(checks)
}

fn classical_checks(medium: &MediumSpec, rel_tol: f64) -> Result<Vec<Check>> {
    let tol = Tolerances {
        rel: rel_tol,
        abs: DEFAULT_ABS_TOL,
    };
    let sol = solve_on_grid(medium, tol, PINNEY_GRID_POINTS)?;
    let d = sol.diagnostics();
    let mut checks = vec![
        Check::below("wronskian |u'v - v'u - 1|", d.wronskian_residual, 1e-8),
        Check::below("pinney residual / beta0^2", d.pinney_residual, 1e-5),
        Check::below("theta - beta0 s [rad]", d.theta_consistency, 1e-8),
    ];

    let mut drift: f64 = 0.0;
    let z0 = sol.grid()[0];
    let i0 = invariant_value(sol.u_trajectory(z0)?, &sol, z0)?;
    for &z in sol.grid() {
        let i = invariant_value(sol.u_trajectory(z)?, &sol, z)?;
        drift = drift.max((i - i0).abs() / i0);
    }
    checks.push(Check::below("invariant relative drift", drift, 1e-8));

    let min_step = sol
        .theta()
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    checks.push(Check {
        name: "theta strictly increasing (min step)".into(),
        measured: min_step,
        threshold: 0.0,
        passed: min_step > 0.0,
    });

    if let LongitudinalProfile::Cosine { .. } = medium.profile() {
        let n_max = (medium.n_transverse().powi(2) + medium.delta_n().powi(2)).sqrt();
        let lo = sol.n_eff().iter().copied().fold(f64::INFINITY, f64::min);
        let hi = sol.n_eff().iter().copied().fold(0.0, f64::max);
        let err = (lo - medium.n_transverse()).abs().max((hi - n_max).abs());
        checks.push(Check::below(
            "N(z) range [N_t, sqrt(N_t^2 + dn^2)]",
            err,
            1e-9,
        ));
    }
    Ok(checks)
}

fn closed_form_checks(noise_values: &[f64]) -> Result<Vec<Check>> {
    let thetas: Vec<f64> = (0..=4000).map(|i| TAU * i as f64 / 4000.0).collect();
    let coherent = GaussianStateSpec::coherent(1.0, 0.0)?;
    let flat = thetas
        .iter()
        .map(|&t| (evolve_noise(&coherent, t) - 1.0).abs())
        .fold(0.0, f64::max);
    let tracks = thetas
        .iter()
        .map(|&t| (gouy_phase(&coherent, t) - t).abs())
        .fold(0.0, f64::max);
    let mut checks = vec![
        Check::below("coherent noise == 1", flat, 1e-12),
        Check::below("coherent Gouy == theta", tracks, 1e-9),
    ];

    let mut bounds: f64 = 0.0;
    let mut pinning: f64 = 0.0;
    let mut jump: f64 = 0.0;
    for &n0 in noise_values {
        let st = GaussianStateSpec::new(0.0, 0.0, n0)?;
        let noise: Vec<f64> = thetas.iter().map(|&t| evolve_noise(&st, t)).collect();
        let lo = noise.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = noise.iter().copied().fold(0.0, f64::max);
        let (want_lo, want_hi) = (n0.min(1.0 / n0), n0.max(1.0 / n0));
        bounds = bounds.max((lo - want_lo).abs()).max((hi - want_hi).abs());
        for m in 0..=8 {
            let t = m as f64 * FRAC_PI_2;
            pinning = pinning.max((gouy_phase(&st, t) - t).abs());
        }
        // |dGouy/dtheta| <= max(dE0^2, 1/dE0^2)
        let step = thetas[1] - thetas[0];
        for w in thetas.windows(2) {
            let d = (gouy_phase(&st, w[1]) - gouy_phase(&st, w[0])).abs();
            jump = jump.max(d / (step * want_hi));
        }
    }
    checks.push(Check::below(
        "noise extrema == {dE0^2, 1/dE0^2}",
        bounds,
        1e-9,
    ));
    checks.push(Check::below("Gouy(m pi/2) == m pi/2", pinning, 1e-9));
    checks.push(Check::below(
        "Gouy continuity (step / bound)",
        jump,
        1.0 + 1e-6,
    ));
    Ok(checks)
}

fn constant_medium_check(medium: &MediumSpec) -> Result<Check> {
    let lambda = medium.wavelength_nm();
    let flat = MediumSpec::new(
        lambda,
        medium.n_transverse(),
        0.0,
        LongitudinalProfile::Constant,
        50.0 * lambda,
    )?;
    let tol = Tolerances {
        rel: 1e-12,
        abs: DEFAULT_ABS_TOL,
    };
    let sol = solve_on_grid(&flat, tol, 1001)?;
    let nt = flat.n_transverse();
    let k0 = flat.k0();
    let mut err: f64 = 0.0;
    for (i, &z) in sol.grid().iter().enumerate() {
        let x = nt * k0 * z;
        err = err
            .max((sol.u()[i] - x.sin() / nt).abs())
            .max((sol.v()[i] - x.cos()).abs())
            .max((sol.rho()[i] - 1.0).abs() * 10.0);
        if z > 0.0 {
            err = err.max((sol.theta()[i] / (flat.beta_t() * z) - 1.0).abs());
        }
    }
    Ok(Check::below(
        "constant medium vs sin/cos (50 wavelengths)",
        err,
        1e-9,
    ))
}

fn oracle_checks(states: &[GaussianStateSpec]) -> Result<Vec<Check>> {
    let mut cases = Vec::new();
    for a in [0.0, 2.0] {
        for phi in [0.0, 0.7] {
            for n0 in [0.5, 1.0, 1.5] {
                cases.push(GaussianStateSpec::new(a, phi, n0)?);
            }
        }
    }
    cases.extend_from_slice(states);
    let mut jobs = Vec::new();
    for st in &cases {
        for theta in [0.3, 1.0, 2.0, 2.8] {
            jobs.push((*st, theta));
        }
    }
    let worst = jobs
        .par_iter()
        .map(|(st, theta)| closed_form_discrepancy(st, *theta))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let mut checks = vec![Check::below(
        "closed form vs quadrature (rel L2)",
        worst,
        1e-5,
    )];

    let coherent = GaussianStateSpec::coherent(2.0, 0.0)?;
    checks.push(Check::below(
        "semigroup 0.4 + 0.7 vs 1.1 (L2)",
        semigroup_error(&coherent)?,
        1e-5,
    ));
    checks.push(Check::below(
        "Fock orthonormality N <= 10",
        fock_orthonormality()?,
        1e-8,
    ));
    checks.push(Check::below(
        "Fock |psi| independent of theta",
        fock_modulus_drift()?,
        1e-12,
    ));
    checks.push(Check::below(
        "ground state phase e^{i theta/2}",
        ground_state_phase_error()?,
        1e-6,
    ));
    checks.push(Check::below(
        "kernel matrix elements N <= 40",
        kernel_matrix_error(1.0)?,
        1e-6,
    ));
    Ok(checks)
}

/// Relative L2 distance between quadrature propagation and the closed form.
pub fn closed_form_discrepancy(state: &GaussianStateSpec, theta: f64) -> Result<f64> {
    let grid = OfsGrid::for_state(state).resolved_for(theta)?;
    let input = SampledWavefunction::from_fn(grid, |e| gaussian_input(state, e));
    let out = propagate_numeric(&input, theta)?;
    let exact = SampledWavefunction::from_fn(grid, |e| evolved_gaussian(state, theta, e));
    Ok(out.relative_l2_error(&exact))
}

/// L2 distance between two hops (0.4 then 0.7) and one hop (1.1).
pub fn semigroup_error(state: &GaussianStateSpec) -> Result<f64> {
    let mut grid = OfsGrid::for_state(state);
    for t in [0.4, 0.7, 1.1] {
        grid = grid.resolved_for(t)?;
    }
    let input = SampledWavefunction::from_fn(grid, |e| gaussian_input(state, e));
    let two = propagate_numeric(&propagate_numeric(&input, 0.4)?, 0.7)?;
    let one = propagate_numeric(&input, 1.1)?;
    Ok(two.l2_distance(&one))
}

fn fock_grid() -> OfsGrid {
    OfsGrid::symmetric(12.0, 4096).expect("valid grid")
}

fn fock_sampled(grid: OfsGrid, n: usize) -> Result<SampledWavefunction> {
    let values = grid
        .nodes()
        .map(|e| fock_wavefunction(n, e))
        .collect::<Result<Vec<_>>>()?;
    SampledWavefunction::new(grid, values)
}

/// `max |<Psi_M|Psi_N> - delta_MN|` for `M, N <= 10`.
pub fn fock_orthonormality() -> Result<f64> {
    let grid = fock_grid();
    let fs = (0..=10)
        .map(|n| fock_sampled(grid, n))
        .collect::<Result<Vec<_>>>()?;
    let mut worst: f64 = 0.0;
    for (m, a) in fs.iter().enumerate() {
        for (n, b) in fs.iter().enumerate() {
            let want = if m == n { 1.0 } else { 0.0 };
            worst = worst.max((a.inner(b) - want).norm());
        }
    }
    Ok(worst)
}

/// Largest change of `|Psi_N(E; theta)|` with `theta` for `N <= 10`.
pub fn fock_modulus_drift() -> Result<f64> {
    let mut worst: f64 = 0.0;
    for n in 0..=10 {
        for i in 0..=80 {
            let e = -8.0 + 0.2 * i as f64;
            let base = fock_wavefunction(n, e)?.norm();
            for theta in [0.3, 1.7, PI, 5.0, -2.2] {
                let d = (fock_propagated(n, e, theta)?.norm() - base).abs();
                worst = worst.max(d / base.max(1e-300).max(1.0));
            }
        }
    }
    Ok(worst)
}

/// Relative L2 error of numeric `N = 0` propagation at `theta = 0.5`
/// against `e^{i/4} Psi_0`.
pub fn ground_state_phase_error() -> Result<f64> {
    let grid = OfsGrid::symmetric(6.0, 2048)?.resolved_for(0.5)?;
    let input = fock_sampled(grid, 0)?;
    let out = propagate_numeric(&input, 0.5)?;
    let phase = Complex64::from_polar(1.0, 0.25);
    let expected =
        SampledWavefunction::from_fn(grid, |e| phase * fock_wavefunction(0, e).expect("n = 0"));
    Ok(out.relative_l2_error(&expected))
}

/// `max |<Psi_M| K(theta) |Psi_N> - delta_MN e^{i(N + 1/2) theta}|` over
/// `M, N <= 40`: the kernel acts diagonally on the Fock basis.
pub fn kernel_matrix_error(theta: f64) -> Result<f64> {
    let grid = fock_grid().resolved_for(theta)?;
    let basis = (0..=40)
        .map(|n| fock_sampled(grid, n))
        .collect::<Result<Vec<_>>>()?;
    let propagated = basis
        .par_iter()
        .map(|f| propagate_numeric(f, theta))
        .collect::<Result<Vec<_>>>()?;
    let mut worst: f64 = 0.0;
    for (n, kn) in propagated.iter().enumerate() {
        for (m, fm) in basis.iter().enumerate() {
            let want = if m == n {
                Complex64::from_polar(1.0, (n as f64 + 0.5) * theta)
            } else {
                Complex64::new(0.0, 0.0)
            };
            worst = worst.max((fm.inner(kn) - want).norm());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fast_level_passes_on_reference_guide() {
        let checks = run_checks(&MediumSpec::reference_cosine(), &[], 1e-10, Level::Fast).unwrap();
        assert!(all_passed(&checks), "{}", format_report(&checks));
    }

    #[test]
    fn loose_tolerance_fails_wronskian() {
        let checks = run_checks(&MediumSpec::reference_cosine(), &[], 1e-2, Level::Fast).unwrap();
        let w = &checks[0];
        assert!(w.name.starts_with("wronskian"));
        assert!(!w.passed, "{}", format_report(&checks));
        assert!(format_report(&checks).contains("FAIL"));
    }

    #[test]
    fn nan_fails() {
        assert!(!Check::below("x", f64::NAN, 1.0).passed);
    }
}
