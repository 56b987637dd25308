//! TOML run configuration. Every key is known; anything else is rejected.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use qlight_core::media::{LongitudinalProfile, MediumSpec, TabulatedProfile};
use qlight_core::quantum::{GaussianStateSpec, DEFAULT_GRID_POINTS};
use qlight_core::scenarios::default_states;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct CliConfig {
    pub medium: MediumConfig,
    #[serde(default)]
    pub states: Vec<StateConfig>,
    #[serde(default)]
    pub run: RunConfig,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct MediumConfig {
    pub wavelength_nm: f64,
    pub n_transverse: f64,
    pub delta_n: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length_nm: Option<f64>,
    pub profile: ProfileConfig,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum ProfileConfig {
    Constant,
    Cosine { lambda_per_k0: f64 },
    Tabulated { samples: Vec<[f64; 2]> },
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct StateConfig {
    pub alpha_abs: f64,
    pub phi_rad: f64,
    pub noise0: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_z_samples")]
    pub z_samples: usize,
    #[serde(default = "default_rel_tol")]
    pub rel_tol: f64,
    /// OFS grid points of each wavefunction snapshot.
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Planes (nm) for wavefunction snapshots; none when empty.
    #[serde(default)]
    pub snapshot_z_nm: Vec<f64>,
}

fn default_z_samples() -> usize {
    2001
}

fn default_rel_tol() -> f64 {
    1e-10
}

fn default_grid_points() -> usize {
    DEFAULT_GRID_POINTS
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("qlight-out")
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            z_samples: default_z_samples(),
            rel_tol: default_rel_tol(),
            grid_points: default_grid_points(),
            output_dir: default_output_dir(),
            snapshot_z_nm: Vec::new(),
        }
    }
}

/// Configuration error; the message names the offending key.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn keyed(key: &str, e: qlight_core::Error) -> ConfigError {
    ConfigError(format!("{key}: {e}"))
}

impl CliConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Parses and validates; `length_nm` is filled in for cosine profiles.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut config: Self = toml::from_str(text).map_err(|e| ConfigError(e.to_string()))?;
        let medium = config.medium()?;
        config.medium.length_nm = Some(medium.length_nm());
        for (i, _) in config.states.iter().enumerate() {
            config.state(i)?;
        }
        let run = &config.run;
        if run.z_samples < 2 {
            return Err(ConfigError(format!(
                "run.z_samples: must be >= 2, got {}",
                run.z_samples
            )));
        }
        if !(run.rel_tol > 0.0 && run.rel_tol < 1.0) {
            return Err(ConfigError(format!(
                "run.rel_tol: must lie in (0, 1), got {}",
                run.rel_tol
            )));
        }
        for &z in &run.snapshot_z_nm {
            if !(0.0..=medium.length_nm()).contains(&z) {
                return Err(ConfigError(format!(
                    "run.snapshot_z_nm: z = {z} nm is outside [0, {}] nm",
                    medium.length_nm()
                )));
            }
        }
        Ok(config)
    }

    pub fn medium(&self) -> Result<MediumSpec, ConfigError> {
        let m = &self.medium;
        if !(m.wavelength_nm.is_finite() && m.wavelength_nm > 0.0) {
            return Err(ConfigError(format!(
                "medium.wavelength_nm: must be finite and > 0, got {}",
                m.wavelength_nm
            )));
        }
        let k0 = 2.0 * PI / m.wavelength_nm;
        let profile = match &m.profile {
            ProfileConfig::Constant => LongitudinalProfile::Constant,
            ProfileConfig::Cosine { lambda_per_k0 } => {
                if !(lambda_per_k0.is_finite() && *lambda_per_k0 > 0.0) {
                    return Err(ConfigError(format!(
                        "medium.profile.lambda_per_k0: must be finite and > 0, got {lambda_per_k0}"
                    )));
                }
                LongitudinalProfile::cosine(k0 / lambda_per_k0)
                    .map_err(|e| keyed("medium.profile.lambda_per_k0", e))?
            }
            ProfileConfig::Tabulated { samples } => {
                let pairs: Vec<(f64, f64)> = samples.iter().map(|s| (s[0], s[1])).collect();
                LongitudinalProfile::Tabulated(
                    TabulatedProfile::new(&pairs)
                        .map_err(|e| keyed("medium.profile.samples", e))?,
                )
            }
        };
        let length = match (m.length_nm, &profile) {
            (Some(l), _) => l,
            (None, LongitudinalProfile::Cosine { spatial_frequency }) => {
                2.0 * PI / spatial_frequency
            }
            (None, _) => {
                return Err(ConfigError(
                    "medium.length_nm: required unless the profile is cosine".into(),
                ))
            }
        };
        MediumSpec::new(m.wavelength_nm, m.n_transverse, m.delta_n, profile, length).map_err(|e| {
            let key = match &e {
                qlight_core::Error::InvalidParameter { name, .. } => format!("medium.{name}"),
                qlight_core::Error::InvalidProfile(_) => "medium.profile.samples".into(),
                _ => "medium".into(),
            };
            keyed(&key, e)
        })
    }

    pub fn state(&self, i: usize) -> Result<GaussianStateSpec, ConfigError> {
        let s = &self.states[i];
        GaussianStateSpec::new(s.alpha_abs, s.phi_rad, s.noise0).map_err(|e| {
            let key = match &e {
                qlight_core::Error::InvalidParameter { name, .. } => format!("states[{i}].{name}"),
                _ => format!("states[{i}]"),
            };
            keyed(&key, e)
        })
    }

    /// Configured states, or the three reference states when none are given.
    pub fn states_or_default(&self) -> Result<Vec<GaussianStateSpec>, ConfigError> {
        if self.states.is_empty() {
            Ok(default_states())
        } else {
            (0..self.states.len()).map(|i| self.state(i)).collect()
        }
    }

    /// Copy with the states block resolved and the output directory set.
    pub fn resolved(&self, states: &[GaussianStateSpec], output_dir: &Path) -> Self {
        let mut c = self.clone();
        c.states = states
            .iter()
            .map(|s| StateConfig {
                alpha_abs: s.amplitude(),
                phi_rad: s.phase(),
                noise0: s.noise0(),
            })
            .collect();
        c.run.output_dir = output_dir.to_path_buf();
        c
    }

    pub fn to_table(&self) -> toml::Table {
        toml::Table::try_from(self).expect("config serializes to a table")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const REFERENCE: &str = r#"
[medium]
wavelength_nm = 653.0
n_transverse = 1.515
delta_n = 0.5

[medium.profile]
type = "cosine"
lambda_per_k0 = 50.0
"#;

    #[test]
    fn defaults_are_filled() {
        let c = CliConfig::parse(REFERENCE).unwrap();
        assert_eq!(c.run, RunConfig::default());
        let m = c.medium().unwrap();
        assert_eq!(m, MediumSpec::reference_cosine());
        assert_eq!(c.medium.length_nm, Some(m.length_nm()));
        assert_eq!(c.states_or_default().unwrap().len(), 3);
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = CliConfig::parse(&format!("{REFERENCE}\n[run]\nz_sample = 10\n")).unwrap_err();
        assert!(err.0.contains("z_sample"), "{err}");
        let err = CliConfig::parse(&REFERENCE.replace("delta_n", "deltan")).unwrap_err();
        assert!(err.0.contains("deltan"), "{err}");
    }

    #[test]
    fn invalid_values_name_the_key() {
        let err = CliConfig::parse(&REFERENCE.replace("653.0", "-1.0")).unwrap_err();
        assert!(err.0.contains("medium.wavelength_nm"), "{err}");
        let text =
            format!("{REFERENCE}\n[[states]]\nalpha_abs = 1.0\nphi_rad = 0.0\nnoise0 = 0.0\n");
        let err = CliConfig::parse(&text).unwrap_err();
        assert!(err.0.contains("states[0].noise0"), "{err}");
        let err = CliConfig::parse(&format!("{REFERENCE}\n[run]\nrel_tol = 2.0\n")).unwrap_err();
        assert!(err.0.contains("run.rel_tol"), "{err}");
    }

    #[test]
    fn tabulated_needs_coverage_and_length() {
        let base = r#"
[medium]
wavelength_nm = 653.0
n_transverse = 1.515
delta_n = 0.5
length_nm = 1000.0

[medium.profile]
type = "tabulated"
samples = [[0.0, 1.0], [500.0, 0.0], [1000.0, -1.0]]
"#;
        CliConfig::parse(base).unwrap();
        let err = CliConfig::parse(&base.replace("[1000.0, -1.0]", "[800.0, -1.0]")).unwrap_err();
        assert!(
            err.0.contains("medium.profile.samples") && err.0.contains("800"),
            "{err}"
        );
        let err = CliConfig::parse(&base.replace("length_nm = 1000.0", "")).unwrap_err();
        assert!(err.0.contains("medium.length_nm"), "{err}");
    }

    #[test]
    fn resolved_round_trips() {
        let c = CliConfig::parse(REFERENCE).unwrap();
        let r = c.resolved(&c.states_or_default().unwrap(), Path::new("x"));
        let text = toml::to_string(&r).unwrap();
        let back = CliConfig::parse(&text).unwrap();
        assert_eq!(back, r);
    }
}
