//! End-to-end drivers: cosine-medium experiment, homogeneous baseline and
//! noise sweeps, plus conversion of their results into CSV tables.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::classical::{
    solve_on_grid, ClassicalSolution, Diagnostics, DEFAULT_ABS_TOL, DEFAULT_REL_TOL, MAX_REL_TOL,
    MIN_REL_TOL,
};
use crate::error::{Error, Result};
use crate::media::{uniform_grid, LongitudinalProfile, MediumSpec};
use crate::ode::Tolerances;
use crate::output::CsvTable;
use crate::quantum::{evolve_noise, gouy_phase, EvolvedGaussian, GaussianStateSpec, OfsGrid};

/// Which result kinds an experiment produces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OutputSelection {
    pub effective_index: bool,
    pub classical_phase: bool,
    pub noise: bool,
    pub gouy: bool,
    pub wavefunction_snapshots: bool,
}

impl OutputSelection {
    pub fn all() -> Self {
        Self {
            effective_index: true,
            classical_phase: true,
            noise: true,
            gouy: true,
            wavefunction_snapshots: true,
        }
    }

    pub fn classical_only() -> Self {
        Self {
            effective_index: true,
            classical_phase: true,
            noise: false,
            gouy: false,
            wavefunction_snapshots: false,
        }
    }

    pub fn needs_states(&self) -> bool {
        self.noise || self.gouy || self.wavefunction_snapshots
    }
}

impl Default for OutputSelection {
    fn default() -> Self {
        Self {
            effective_index: true,
            classical_phase: true,
            noise: true,
            gouy: true,
            wavefunction_snapshots: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub medium: MediumSpec,
    pub states: Vec<GaussianStateSpec>,
    pub z_samples: usize,
    pub outputs: OutputSelection,
    pub rel_tol: f64,
    /// Planes (nm) at which wavefunction snapshots are taken.
    pub snapshot_z: Vec<f64>,
    /// Points of each snapshot's OFS grid.
    pub snapshot_points: usize,
}

impl ExperimentConfig {
    /// Default outputs, tolerance and snapshot settings (one snapshot at `L`).
    pub fn new(medium: MediumSpec, states: Vec<GaussianStateSpec>, z_samples: usize) -> Self {
        let snapshot_z = vec![medium.length_nm()];
        Self {
            medium,
            states,
            z_samples,
            outputs: OutputSelection::default(),
            rel_tol: DEFAULT_REL_TOL,
            snapshot_z,
            snapshot_points: crate::quantum::DEFAULT_GRID_POINTS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.z_samples < 2 {
            return Err(Error::InvalidParameter {
                name: "z_samples",
                value: self.z_samples as f64,
                reason: "must be >= 2",
            });
        }
        if self.outputs.needs_states() && self.states.is_empty() {
            return Err(Error::InvalidConfig(
                "quantum outputs requested but no states given".into(),
            ));
        }
        if !(MIN_REL_TOL..=MAX_REL_TOL).contains(&self.rel_tol) {
            return Err(Error::InvalidParameter {
                name: "rel_tol",
                value: self.rel_tol,
                reason: "must lie in [1e-13, 1e-6]",
            });
        }
        let length = self.medium.length_nm();
        if self.outputs.wavefunction_snapshots {
            for &z in &self.snapshot_z {
                if !(0.0..=length).contains(&z) {
                    return Err(Error::OutOfDomain {
                        z,
                        lo: 0.0,
                        hi: length,
                    });
                }
            }
            OfsGrid::symmetric(1.0, self.snapshot_points)?;
        }
        Ok(())
    }
}

/// One coherent and two squeezed inputs: `dE0^2` = 1, 3/2, 1/2
/// with `|alpha| = 1`, `phi = 0` (noise and Gouy phase do not depend on
/// either).
pub fn default_states() -> Vec<GaussianStateSpec> {
    [1.0, 1.5, 0.5]
        .into_iter()
        .map(|n0| GaussianStateSpec::new(1.0, 0.0, n0).expect("valid defaults"))
        .collect()
}

/// Classical columns on the uniform z-grid (scaled `u`, `v`).
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalColumns {
    pub z_nm: Vec<f64>,
    pub n_eff: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub rho: Vec<f64>,
    pub theta: Vec<f64>,
    pub s_nm: Vec<f64>,
}

impl ClassicalColumns {
    pub fn from_solution(sol: &ClassicalSolution) -> Self {
        Self {
            z_nm: sol.grid().to_vec(),
            n_eff: sol.n_eff().to_vec(),
            u: sol.u().to_vec(),
            v: sol.v().to_vec(),
            rho: sol.rho().to_vec(),
            theta: sol.theta().to_vec(),
            s_nm: sol.s_nm().to_vec(),
        }
    }

    /// `z_nm, N_eff, u, v, rho, theta_rad, s_nm`.
    pub fn table(&self) -> CsvTable {
        CsvTable::from_columns(
            &["z_nm", "N_eff", "u", "v", "rho", "theta_rad", "s_nm"],
            &[
                &self.z_nm,
                &self.n_eff,
                &self.u,
                &self.v,
                &self.rho,
                &self.theta,
                &self.s_nm,
            ],
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateCurve {
    pub state: GaussianStateSpec,
    pub noise: Vec<f64>,
    pub gouy: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub state_index: usize,
    pub z_nm: f64,
    pub theta: f64,
    pub grid: OfsGrid,
    pub values: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub outputs: OutputSelection,
    pub tolerances: Tolerances,
    pub classical: ClassicalColumns,
    /// `None` for the analytic homogeneous baseline.
    pub diagnostics: Option<Diagnostics>,
    pub states: Vec<StateCurve>,
    pub snapshots: Vec<Snapshot>,
}

/// Cosine-medium experiment: `N(z)`, `theta(z)` and, per state, noise and
/// Gouy phase on a uniform grid over `[0, L]`.
pub fn run_cosine_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    if !matches!(config.medium.profile(), LongitudinalProfile::Cosine { .. }) {
        return Err(Error::InvalidConfig(
            "cosine experiment needs a cosine profile".into(),
        ));
    }
    run_experiment(config)
}

/// Same outputs for any profile, from the numerical classical solution.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let tol = Tolerances {
        rel: config.rel_tol,
        abs: DEFAULT_ABS_TOL,
    };
    let sol = solve_on_grid(&config.medium, tol, config.z_samples)?;
    let classical = ClassicalColumns::from_solution(&sol);
    let snapshot_theta = if config.outputs.wavefunction_snapshots {
        config
            .snapshot_z
            .iter()
            .map(|&z| sol.theta_at(z))
            .collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };
    Ok(finish(
        config,
        tol,
        classical,
        Some(sol.diagnostics()),
        &snapshot_theta,
    ))
}

/// Homogeneous guide: `theta = beta0 z` (`= beta_t z` when `dn = 0`),
/// `rho = 1`, written analytically.
pub fn run_homogeneous_baseline(config: &ExperimentConfig) -> Result<ExperimentResult> {
    let medium = &config.medium;
    if !(medium.delta_n() == 0.0 || matches!(medium.profile(), LongitudinalProfile::Constant)) {
        return Err(Error::InvalidConfig(
            "homogeneous baseline needs delta_n = 0 or a constant profile".into(),
        ));
    }
    config.validate()?;
    let k0 = medium.k0();
    let beta = medium.beta0();
    let n = beta / k0;
    let z_nm = uniform_grid(medium.length_nm(), config.z_samples);
    let zeta: Vec<f64> = z_nm.iter().map(|z| k0 * z).collect();
    let classical = ClassicalColumns {
        n_eff: vec![n; z_nm.len()],
        u: zeta.iter().map(|x| (n * x).sin() / n).collect(),
        v: zeta.iter().map(|x| (n * x).cos()).collect(),
        rho: vec![1.0; z_nm.len()],
        theta: z_nm.iter().map(|z| beta * z).collect(),
        s_nm: z_nm.clone(),
        z_nm,
    };
    let snapshot_theta: Vec<f64> = if config.outputs.wavefunction_snapshots {
        config.snapshot_z.iter().map(|z| beta * z).collect()
    } else {
        Vec::new()
    };
    let tol = Tolerances {
        rel: config.rel_tol,
        abs: DEFAULT_ABS_TOL,
    };
    Ok(finish(config, tol, classical, None, &snapshot_theta))
}

fn finish(
    config: &ExperimentConfig,
    tolerances: Tolerances,
    classical: ClassicalColumns,
    diagnostics: Option<Diagnostics>,
    snapshot_theta: &[f64],
) -> ExperimentResult {
    let states = if config.outputs.noise || config.outputs.gouy {
        config
            .states
            .par_iter()
            .map(|st| StateCurve {
                state: *st,
                noise: classical
                    .theta
                    .iter()
                    .map(|&t| evolve_noise(st, t))
                    .collect(),
                gouy: classical.theta.iter().map(|&t| gouy_phase(st, t)).collect(),
            })
            .collect()
    } else {
        Vec::new()
    };
    let mut jobs = Vec::new();
    for (i, _) in config.states.iter().enumerate() {
        for (&z, &theta) in config.snapshot_z.iter().zip(snapshot_theta) {
            jobs.push((i, z, theta));
        }
    }
    let snapshots = jobs
        .into_par_iter()
        .map(|(i, z_nm, theta)| {
            let state = &config.states[i];
            let e_max = OfsGrid::for_state(state).e_max();
            let grid = OfsGrid::symmetric(e_max, config.snapshot_points).expect("validated");
            // closed form: no caustic at theta = m pi
            let ev = EvolvedGaussian::new(state, theta);
            Snapshot {
                state_index: i,
                z_nm,
                theta,
                grid,
                values: grid.nodes().map(|e| ev.amplitude_at(e)).collect(),
            }
        })
        .collect();
    ExperimentResult {
        outputs: config.outputs,
        tolerances,
        classical,
        diagnostics,
        states,
        snapshots,
    }
}

impl ExperimentResult {
    pub fn classical_table(&self) -> CsvTable {
        self.classical.table()
    }

    pub fn effective_index_table(&self) -> CsvTable {
        let c = &self.classical;
        CsvTable::from_columns(&["z_nm", "N_eff"], &[&c.z_nm, &c.n_eff])
    }

    pub fn state_table(&self, i: usize) -> CsvTable {
        let c = &self.classical;
        let s = &self.states[i];
        CsvTable::from_columns(
            &["z_nm", "theta_rad", "noise", "gouy_rad"],
            &[&c.z_nm, &c.theta, &s.noise, &s.gouy],
        )
    }

    pub fn snapshot_table(&self, k: usize) -> CsvTable {
        let snap = &self.snapshots[k];
        let mut t = CsvTable::new(["e", "re", "im", "abs2"]);
        for (e, v) in snap.grid.nodes().zip(&snap.values) {
            t.push(vec![e, v.re, v.im, v.norm_sqr()]);
        }
        t
    }

    /// `(file name, kind, table)` for every selected output, in a fixed
    /// order.
    pub fn tables(&self) -> Vec<(String, String, CsvTable)> {
        let mut out = Vec::new();
        if self.outputs.effective_index {
            out.push((
                "effective_index.csv".into(),
                "effective_index".into(),
                self.effective_index_table(),
            ));
        }
        if self.outputs.classical_phase {
            out.push((
                "classical.csv".into(),
                "classical_phase".into(),
                self.classical_table(),
            ));
        }
        if self.outputs.noise || self.outputs.gouy {
            for i in 0..self.states.len() {
                out.push((
                    format!("state_{i}.csv"),
                    "noise_gouy".into(),
                    self.state_table(i),
                ));
            }
        }
        for (k, snap) in self.snapshots.iter().enumerate() {
            let name = format!("wavefunction_state{}_{k}.csv", snap.state_index);
            out.push((name, "wavefunction_snapshot".into(), self.snapshot_table(k)));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub noise0: f64,
    pub z_nm: f64,
    pub noise: f64,
    pub gouy: f64,
}

/// Noise and Gouy phase for every `(dE0^2, z)` pair, ordered by noise value
/// then z. The classical phase is integrated once at the default tolerance.
pub fn sweep_noise(
    medium: &MediumSpec,
    noise_values: &[f64],
    z_samples: usize,
) -> Result<Vec<SweepRow>> {
    let states = noise_values
        .iter()
        .map(|&n0| GaussianStateSpec::new(0.0, 0.0, n0))
        .collect::<Result<Vec<_>>>()?;
    if z_samples < 2 {
        return Err(Error::InvalidParameter {
            name: "z_samples",
            value: z_samples as f64,
            reason: "must be >= 2",
        });
    }
    let sol = solve_on_grid(
        medium,
        Tolerances {
            rel: DEFAULT_REL_TOL,
            abs: DEFAULT_ABS_TOL,
        },
        z_samples,
    )?;
    let rows: Vec<Vec<SweepRow>> = states
        .par_iter()
        .map(|st| {
            sol.grid()
                .iter()
                .zip(sol.theta())
                .map(|(&z_nm, &t)| SweepRow {
                    noise0: st.noise0(),
                    z_nm,
                    noise: evolve_noise(st, t),
                    gouy: gouy_phase(st, t),
                })
                .collect()
        })
        .collect();
    Ok(rows.into_iter().flatten().collect())
}

pub fn sweep_table(rows: &[SweepRow]) -> CsvTable {
    let mut t = CsvTable::new(["noise0", "z_nm", "noise", "gouy_rad"]);
    for r in rows {
        t.push(vec![r.noise0, r.z_nm, r.noise, r.gouy]);
    }
    t
}
