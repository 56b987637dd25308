//! `qlight`: classical and quantum propagation through longitudinally
//! modulated waveguides, written as CSV plus a TOML manifest.
//!
//! Exit codes: 0 success, 1 failed verification check, 2 configuration
//! error, 3 integration failure.

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use qlight_core::classical::{solve_fundamental, DEFAULT_ABS_TOL};
use qlight_core::media::{LongitudinalProfile, MediumSpec};
use qlight_core::output::{write_tables, DiagnosticsRecord, Manifest, ToleranceRecord};
use qlight_core::scenarios::{
    run_cosine_experiment, run_experiment, run_homogeneous_baseline, ClassicalColumns,
    ExperimentConfig, OutputSelection,
};
use qlight_core::verify::{all_passed, format_report, run_checks, Level};
use qlight_core::Error;

use config::{CliConfig, ConfigError};

#[derive(Parser)]
#[command(
    name = "qlight",
    version,
    about = "Light propagation in longitudinally inhomogeneous waveguides"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the classical amplitude and phase; writes classical.csv.
    Classical {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides run.output_dir).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Noise and Gouy phase of each state along the guide.
    Quantum {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the invariant and oracle checks and print a pass/fail table.
    Verify {
        /// Medium, states and rel_tol to check; the reference cosine guide
        /// when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = LevelArg::Fast)]
        level: LevelArg,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum LevelArg {
    Fast,
    Full,
}

enum Failure {
    Checks,
    Config(String),
    Integration(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.0)
    }
}

/// Integration failures map to exit 3, everything else the core rejects is
/// a configuration problem.
fn from_core(key: &str, e: Error) -> Failure {
    match e {
        Error::IntegrationFailure { .. } => Failure::Integration(e.to_string()),
        Error::InvalidParameter { name, .. } => Failure::Config(format!("run.{name}: {e}")),
        _ => Failure::Config(format!("{key}: {e}")),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Classical { config, out } => cmd_classical(&config, out.as_deref()),
        Command::Quantum { config, out } => cmd_quantum(&config, out.as_deref()),
        Command::Verify { config, level } => cmd_verify(config.as_deref(), level),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Checks) => ExitCode::from(1),
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Integration(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

fn output_dir(config: &CliConfig, out: Option<&Path>) -> PathBuf {
    out.map(Path::to_path_buf)
        .unwrap_or_else(|| config.run.output_dir.clone())
}

fn manifest(command: &str, config: toml::Table, rel_tol: f64) -> Manifest {
    Manifest {
        generator: "qlight".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: command.into(),
        tolerances: ToleranceRecord {
            rel_tol,
            abs_tol: DEFAULT_ABS_TOL,
        },
        diagnostics: None,
        config,
        files: Vec::new(),
    }
}

fn cmd_classical(path: &Path, out: Option<&Path>) -> Result<(), Failure> {
    let config = CliConfig::load(path)?;
    let medium = config.medium()?;
    let dir = output_dir(&config, out);
    let sol = solve_fundamental(&medium, config.run.rel_tol, config.run.z_samples)
        .map_err(|e| from_core("medium", e))?;

    let tables = vec![(
        "classical.csv".to_string(),
        "classical_phase".to_string(),
        ClassicalColumns::from_solution(&sol).table(),
    )];
    let files = write_tables(&dir, &tables).map_err(|e| from_core("run.output_dir", e))?;
    let d = sol.diagnostics();
    let mut m = manifest(
        "classical",
        config.resolved(&[], &dir).to_table(),
        config.run.rel_tol,
    );
    m.diagnostics = Some(DiagnosticsRecord {
        wronskian_residual: d.wronskian_residual,
        pinney_residual: d.pinney_residual,
        theta_consistency: d.theta_consistency,
    });
    m.files = files;
    m.write(&dir).map_err(|e| from_core("run.output_dir", e))?;
    println!(
        "wrote {} rows to {}",
        sol.grid().len(),
        dir.join("classical.csv").display()
    );
    Ok(())
}

fn cmd_quantum(path: &Path, out: Option<&Path>) -> Result<(), Failure> {
    let config = CliConfig::load(path)?;
    let medium = config.medium()?;
    let states = config.states_or_default()?;
    let dir = output_dir(&config, out);

    let mut exp = ExperimentConfig::new(medium.clone(), states.clone(), config.run.z_samples);
    exp.rel_tol = config.run.rel_tol;
    exp.outputs = OutputSelection {
        wavefunction_snapshots: !config.run.snapshot_z_nm.is_empty(),
        ..OutputSelection::all()
    };
    exp.snapshot_z = config.run.snapshot_z_nm.clone();
    exp.snapshot_points = config.run.grid_points;

    let result = match medium.profile() {
        LongitudinalProfile::Cosine { .. } => run_cosine_experiment(&exp),
        _ if is_homogeneous(&medium) => run_homogeneous_baseline(&exp),
        _ => run_experiment(&exp),
    }
    .map_err(|e| from_core("medium", e))?;

    let files = write_tables(&dir, &result.tables()).map_err(|e| from_core("run.output_dir", e))?;
    let mut m = manifest(
        "quantum",
        config.resolved(&states, &dir).to_table(),
        config.run.rel_tol,
    );
    m.diagnostics = result.diagnostics.map(|d| DiagnosticsRecord {
        wronskian_residual: d.wronskian_residual,
        pinney_residual: d.pinney_residual,
        theta_consistency: d.theta_consistency,
    });
    m.files = files;
    m.write(&dir).map_err(|e| from_core("run.output_dir", e))?;
    println!("wrote {} files to {}", m.files.len() + 1, dir.display());
    Ok(())
}

fn is_homogeneous(medium: &MediumSpec) -> bool {
    medium.delta_n() == 0.0 || matches!(medium.profile(), LongitudinalProfile::Constant)
}

fn cmd_verify(path: Option<&Path>, level: LevelArg) -> Result<(), Failure> {
    let (medium, states, rel_tol) = match path {
        Some(p) => {
            let config = CliConfig::load(p)?;
            let states = (0..config.states.len())
                .map(|i| config.state(i))
                .collect::<Result<Vec<_>, _>>()?;
            (config.medium()?, states, config.run.rel_tol)
        }
        None => (MediumSpec::reference_cosine(), Vec::new(), 1e-10),
    };
    let level = match level {
        LevelArg::Fast => Level::Fast,
        LevelArg::Full => Level::Full,
    };
    let checks =
        run_checks(&medium, &states, rel_tol, level).map_err(|e| from_core("medium", e))?;
    print!("{}", format_report(&checks));
    if all_passed(&checks) {
        println!("all {} checks passed", checks.len());
        Ok(())
    } else {
        for c in checks.iter().filter(|c| !c.passed) {
            eprintln!(
                "failed: {} (measured {:e}, threshold {:e})",
                c.name, c.measured, c.threshold
            );
        }
        Err(Failure::Checks)
    }
}
