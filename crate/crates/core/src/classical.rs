//! Fundamental solutions of `q'' + beta(z)^2 q = 0`, the Ermakov-Pinney
//! amplitude `rho`, the accumulated phase `theta` and the comoving length `s`.
//!
//! Integration runs in the scaled coordinate `zeta = k0 z` with coefficient
//! `N(z)^2 = (beta / k0)^2`. The fundamental pair is stored in the same
//! scaling: `u` is `k0` times the physical `u(z)` and primes are
//! `d/dzeta`, which makes every stored column dimensionless. With this
//! convention `rho = sqrt((N0 u)^2 + v^2)` where `N0 = beta0 / k0`.

use crate::error::{Error, Result};
use crate::media::{hermite_cubic, uniform_grid, MediumSpec};
use crate::ode::{self, Stats, Tolerances};

pub const DEFAULT_REL_TOL: f64 = 1e-10;
pub const DEFAULT_ABS_TOL: f64 = 1e-12;
pub const MIN_REL_TOL: f64 = 1e-13;
pub const MAX_REL_TOL: f64 = 1e-6;
pub const MIN_GRID_POINTS: usize = 16;

/// Sampled fundamental solution over `[0, L]`.
#[derive(Debug, Clone)]
pub struct ClassicalSolution {
    k0: f64,
    beta0: f64,
    z: Vec<f64>,
    n_eff: Vec<f64>,
    u: Vec<f64>,
    u_prime: Vec<f64>,
    v: Vec<f64>,
    v_prime: Vec<f64>,
    rho: Vec<f64>,
    rho_prime: Vec<f64>,
    theta: Vec<f64>,
    s_nm: Vec<f64>,
    wronskian_residual: f64,
    pinney_residual: f64,
    tolerances: Tolerances,
    stats: Stats,
}

/// Field coefficient `q` and `p = dq/dz` in physical units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalTrajectory {
    pub q: f64,
    pub p: f64,
}

/// Comoving-frame coordinates `(Q, P)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComovingPoint {
    pub q: f64,
    pub p: f64,
}

/// Interpolated fundamental pair at an arbitrary `z` (scaled convention).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FundamentalState {
    pub u: f64,
    pub u_prime: f64,
    pub v: f64,
    pub v_prime: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostics {
    /// `max |u'v - v'u - 1|` over the grid.
    pub wronskian_residual: f64,
    /// `max |rho'' + beta^2 rho - beta0^2 / rho^3| / beta0^2` over interior
    /// points, `rho''` by centred differences.
    pub pinney_residual: f64,
    /// `max |theta - beta0 s|` in radians.
    pub theta_consistency: f64,
}

/// Integrates the two fundamental initial-value problems with the default
/// absolute tolerance. `rel_tol` must lie in `[1e-13, 1e-6]` and the grid
/// needs at least 16 points.
pub fn solve_fundamental(
    medium: &MediumSpec,
    rel_tol: f64,
    grid_points: usize,
) -> Result<ClassicalSolution> {
    if !(MIN_REL_TOL..=MAX_REL_TOL).contains(&rel_tol) {
        return Err(Error::InvalidParameter {
            name: "rel_tol",
            value: rel_tol,
            reason: "must lie in [1e-13, 1e-6]",
        });
    }
    if grid_points < MIN_GRID_POINTS {
        return Err(Error::InvalidParameter {
            name: "grid_points",
            value: grid_points as f64,
            reason: "must be >= 16",
        });
    }
    solve_on_grid(
        medium,
        Tolerances {
            rel: rel_tol,
            abs: DEFAULT_ABS_TOL,
        },
        grid_points,
    )
}

/// Same integration as [`solve_fundamental`] without the tolerance and grid
/// range checks (any positive tolerance, at least two points). Used by the
/// scenario drivers and by the self-check that demonstrates what a loose
/// tolerance does to the invariants.
pub fn solve_on_grid(
    medium: &MediumSpec,
    tol: Tolerances,
    grid_points: usize,
) -> Result<ClassicalSolution> {
    if !(tol.rel > 0.0 && tol.rel < 1.0 && tol.abs > 0.0) {
        return Err(Error::InvalidParameter {
            name: "rel_tol",
            value: tol.rel,
            reason: "tolerances must be positive and rel_tol < 1",
        });
    }
    if grid_points < 2 {
        return Err(Error::InvalidParameter {
            name: "grid_points",
            value: grid_points as f64,
            reason: "must be >= 2",
        });
    }
    let k0 = medium.k0();
    let beta0 = medium.beta0();
    let n0 = beta0 / k0;
    let n0_sq = n0 * n0;
    let length = medium.length_nm();
    let z = uniform_grid(length, grid_points);
    let zeta: Vec<f64> = z.iter().map(|z| k0 * z).collect();
    let zeta_end = zeta[zeta.len() - 1];

    // y = [u, u', v, v', theta, s] in the scaled coordinate
    let rhs = |zeta: f64, y: &[f64; 6]| {
        let n_sq = medium.effective_index_sq_unchecked(zeta / k0);
        let inv_rho_sq = 1.0 / (n0_sq * y[0] * y[0] + y[2] * y[2]);
        [
            y[1],
            -n_sq * y[0],
            y[3],
            -n_sq * y[2],
            n0 * inv_rho_sq,
            inv_rho_sq,
        ]
    };
    let y0 = [0.0, 1.0, 1.0, 0.0, 0.0, 0.0];
    let sol = ode::integrate(rhs, 0.0, y0, zeta_end, &zeta, tol).map_err(|f| {
        Error::IntegrationFailure {
            z_nm: f.t / k0,
            reason: f.reason,
        }
    })?;

    let n = z.len();
    let mut out = ClassicalSolution {
        k0,
        beta0,
        n_eff: z
            .iter()
            .map(|&zi| medium.effective_index_sq_unchecked(zi).sqrt())
            .collect(),
        z,
        u: Vec::with_capacity(n),
        u_prime: Vec::with_capacity(n),
        v: Vec::with_capacity(n),
        v_prime: Vec::with_capacity(n),
        rho: Vec::with_capacity(n),
        rho_prime: Vec::with_capacity(n),
        theta: Vec::with_capacity(n),
        s_nm: Vec::with_capacity(n),
        wronskian_residual: 0.0,
        pinney_residual: 0.0,
        tolerances: tol,
        stats: sol.stats,
    };
    for y in &sol.states {
        let rho = (n0_sq * y[0] * y[0] + y[2] * y[2]).sqrt();
        out.u.push(y[0]);
        out.u_prime.push(y[1]);
        out.v.push(y[2]);
        out.v_prime.push(y[3]);
        out.rho.push(rho);
        out.rho_prime
            .push((n0_sq * y[0] * y[1] + y[2] * y[3]) / rho);
        out.theta.push(y[4]);
        out.s_nm.push(y[5] / k0);
    }
    let diag = out.diagnostics();
    out.wronskian_residual = diag.wronskian_residual;
    out.pinney_residual = diag.pinney_residual;
    Ok(out)
}

impl ClassicalSolution {
    pub fn k0(&self) -> f64 {
        self.k0
    }

    pub fn beta0(&self) -> f64 {
        self.beta0
    }

    pub fn length_nm(&self) -> f64 {
        self.z[self.z.len() - 1]
    }

    pub fn grid(&self) -> &[f64] {
        &self.z
    }

    /// `N(z) = beta(z) / k0` at the grid points.
    pub fn n_eff(&self) -> &[f64] {
        &self.n_eff
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn u_prime(&self) -> &[f64] {
        &self.u_prime
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    pub fn v_prime(&self) -> &[f64] {
        &self.v_prime
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    pub fn rho_prime(&self) -> &[f64] {
        &self.rho_prime
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// Comoving length `s(z) = int_0^z rho^-2 dz'` in nm.
    pub fn s_nm(&self) -> &[f64] {
        &self.s_nm
    }

    pub fn wronskian_residual(&self) -> f64 {
        self.wronskian_residual
    }

    pub fn pinney_residual(&self) -> f64 {
        self.pinney_residual
    }

    pub fn tolerances(&self) -> Tolerances {
        self.tolerances
    }

    pub fn stats(&self) -> Stats {
        self.stats
    }

    // interval index, local coordinate in [0, 1], interval width in zeta
    fn locate(&self, z: f64) -> Result<(usize, f64, f64)> {
        let hi = self.length_nm();
        if !(z >= 0.0 && z <= hi) {
            return Err(Error::OutOfDomain { z, lo: 0.0, hi });
        }
        let k = match self.z.partition_point(|&zk| zk <= z) {
            0 => 0,
            p => (p - 1).min(self.z.len() - 2),
        };
        let dz = self.z[k + 1] - self.z[k];
        Ok((k, (z - self.z[k]) / dz, self.k0 * dz))
    }

    fn n_sq_at_node(&self, k: usize) -> f64 {
        self.n_eff[k] * self.n_eff[k]
    }

    /// Fundamental pair at `z`; cubic Hermite on (value, derivative) node
    /// pairs, using `u'' = -N^2 u` for the derivative columns.
    pub fn state_at(&self, z: f64) -> Result<FundamentalState> {
        let (k, t, h) = self.locate(z)?;
        let (a, b) = (k, k + 1);
        let (na, nb) = (self.n_sq_at_node(a), self.n_sq_at_node(b));
        let interp = |y: &[f64], dy: &[f64], scale_a: f64, scale_b: f64| {
            hermite_cubic(t, y[a], y[b], scale_a * dy[a] * h, scale_b * dy[b] * h)
        };
        Ok(FundamentalState {
            u: interp(&self.u, &self.u_prime, 1.0, 1.0),
            v: interp(&self.v, &self.v_prime, 1.0, 1.0),
            u_prime: interp(&self.u_prime, &self.u, -na, -nb),
            v_prime: interp(&self.v_prime, &self.v, -na, -nb),
        })
    }

    /// `rho(z) = sqrt((beta0 u)^2 + v^2)` from the interpolated pair.
    pub fn rho_at(&self, z: f64) -> Result<f64> {
        let st = self.state_at(z)?;
        Ok(self.rho_of(&st))
    }

    /// `d rho / dz` in nm^-1.
    pub fn rho_prime_at(&self, z: f64) -> Result<f64> {
        let st = self.state_at(z)?;
        let n0 = self.beta0 / self.k0;
        let rho = self.rho_of(&st);
        Ok(self.k0 * (n0 * n0 * st.u * st.u_prime + st.v * st.v_prime) / rho)
    }

    fn rho_of(&self, st: &FundamentalState) -> f64 {
        let n0 = self.beta0 / self.k0;
        (n0 * n0 * st.u * st.u + st.v * st.v).sqrt()
    }

    /// Accumulated phase at `z`, Hermite-interpolated with
    /// `d theta / d zeta = N0 / rho^2` at the nodes.
    pub fn theta_at(&self, z: f64) -> Result<f64> {
        let (k, t, h) = self.locate(z)?;
        let n0 = self.beta0 / self.k0;
        let slope = |i: usize| n0 / (self.rho[i] * self.rho[i]);
        Ok(hermite_cubic(
            t,
            self.theta[k],
            self.theta[k + 1],
            slope(k) * h,
            slope(k + 1) * h,
        ))
    }

    /// Physical trajectory `q = u(z)`, `p = u'(z)`: the solution with
    /// `q(0) = 0`, `p(0) = 1`.
    pub fn u_trajectory(&self, z: f64) -> Result<ClassicalTrajectory> {
        let st = self.state_at(z)?;
        Ok(ClassicalTrajectory {
            q: st.u / self.k0,
            p: st.u_prime,
        })
    }

    /// Physical trajectory `q = v(z)`, `p = v'(z)`: the solution with
    /// `q(0) = 1`, `p(0) = 0`.
    pub fn v_trajectory(&self, z: f64) -> Result<ClassicalTrajectory> {
        let st = self.state_at(z)?;
        Ok(ClassicalTrajectory {
            q: st.v,
            p: self.k0 * st.v_prime,
        })
    }

    pub fn diagnostics(&self) -> Diagnostics {
        let n = self.z.len();
        let n0 = self.beta0 / self.k0;
        let n0_sq = n0 * n0;
        let wronskian_residual = (0..n)
            .map(|i| (self.u_prime[i] * self.v[i] - self.v_prime[i] * self.u[i] - 1.0).abs())
            .fold(0.0, f64::max);
        let theta_consistency = (0..n)
            .map(|i| (self.theta[i] - self.beta0 * self.s_nm[i]).abs())
            .fold(0.0, f64::max);
        let pinney_residual = if n >= 3 {
            let h = self.k0 * (self.z[1] - self.z[0]);
            (1..n - 1)
                .map(|i| {
                    let r = self.rho[i];
                    let r2 = (self.rho[i + 1] - 2.0 * r + self.rho[i - 1]) / (h * h);
                    (r2 + self.n_sq_at_node(i) * r - n0_sq / (r * r * r)).abs() / n0_sq
                })
                .fold(0.0, f64::max)
        } else {
            0.0
        };
        Diagnostics {
            wronskian_residual,
            pinney_residual,
            theta_consistency,
        }
    }
}

/// Maps `(q, p)` to the comoving frame: `Q = q / rho`,
/// `P = rho p - (rho_dot / rho) Q`, where `rho_dot = d rho / ds = rho^2 rho'`.
///
/// In this frame `(P^2 + beta0^2 Q^2) / 2` is the Lewis-Ermakov invariant.
/// `rho` must be positive.
pub fn comoving_transform(traj: ClassicalTrajectory, rho: f64, rho_dot: f64) -> ComovingPoint {
    debug_assert!(rho > 0.0, "rho must be positive, got {rho}");
    let q = traj.q / rho;
    ComovingPoint {
        q,
        p: rho * traj.p - rho_dot / rho * q,
    }
}

/// `[(rho p - q rho')^2 + beta0^2 (q / rho)^2] / 2` at `z`.
pub fn invariant_value(traj: ClassicalTrajectory, sol: &ClassicalSolution, z: f64) -> Result<f64> {
    let rho = sol.rho_at(z)?;
    let rho_prime = sol.rho_prime_at(z)?;
    Ok(invariant_from_parts(traj, rho, rho_prime, sol.beta0()))
}

pub(crate) fn invariant_from_parts(
    traj: ClassicalTrajectory,
    rho: f64,
    rho_prime: f64,
    beta0: f64,
) -> f64 {
    let a = rho * traj.p - traj.q * rho_prime;
    let b = beta0 * traj.q / rho;
    0.5 * (a * a + b * b)
}
