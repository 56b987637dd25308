use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("z = {z} nm is outside the valid interval [{lo}, {hi}] nm")]
    OutOfDomain { z: f64, lo: f64, hi: f64 },

    #[error("invalid tabulated profile: {0}")]
    InvalidProfile(String),

    #[error("integration failed at z = {z_nm} nm: {reason}")]
    IntegrationFailure { z_nm: f64, reason: &'static str },

    #[error("Fock index {n} is outside the supported range 0..={max}")]
    FockIndex { n: usize, max: usize },

    #[error(
        "propagator is singular at theta = {theta} (|sin theta| < {epsilon}); \
         evaluate at theta +/- epsilon or use the closed-form evolution"
    )]
    Caustic { theta: f64, epsilon: f64 },

    #[error("OFS grid under-resolved for theta = {theta}: {required_points} points required, {points} given")]
    UnderResolved {
        theta: f64,
        points: usize,
        required_points: usize,
    },

    #[error("wavefunction does not vanish at the grid boundary (|psi| = {boundary_abs:e})")]
    GridTooNarrow { boundary_abs: f64 },

    #[error("invalid experiment configuration: {0}")]
    InvalidConfig(String),

    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
