use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("grid resolution must be even and at least 4, got {0}")]
    InvalidResolution(usize),
    #[error("box period must be positive and finite, got {0}")]
    InvalidPeriod(f64),
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("spectrum decay must be positive, got {0}")]
    InvalidDecay(f64),
}

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("invalid physics parameter: {0}")]
    InvalidParams(String),
    #[error("time step must be positive, got {0}")]
    InvalidStep(f64),
    #[error("horizon {t_final} is not a whole number of steps of size {dt}")]
    MisalignedHorizon { t_final: f64, dt: f64 },
    #[error("CFL violated: dt * max|u| * k_max = {courant:.4} > 0.5 at t = {time}")]
    Cfl { courant: f64, time: f64 },
    #[error("blow-up at t = {time}: |u| = {norm:e} (limit {limit:e})")]
    BlowUp { time: f64, norm: f64, limit: f64 },
    #[error("steady state not reached by t = {t_max}: residual {residual:e} > {tol:e}")]
    NotConverged { t_max: f64, residual: f64, tol: f64 },
}

#[derive(Debug, Error)]
pub enum EstimateError {
    #[error("trajectory has no dense scalar series")]
    MissingSeries,
    #[error("trajectory too short: {0}")]
    TooShort(String),
    #[error("absorbing radius {delta0} must exceed the asymptotic radius {rho0}")]
    RadiusBelowAsymptotic { delta0: f64, rho0: f64 },
    #[error("window length {0} is invalid for this trajectory")]
    InvalidWindow(f64),
}

#[derive(Debug, Error)]
pub enum LabError {
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("empty point set")]
    EmptySet,
    #[error("trajectories are not sampled on a common time grid")]
    MismatchedSampling,
    #[error("sampled horizon {have} does not cover [0, {need}]")]
    HorizonTooShort { have: f64, need: f64 },
    #[error("invalid metric: {0}")]
    InvalidMetric(String),
    #[error("invalid experiment setup: {0}")]
    InvalidSetup(String),
}

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("bad snapshot magic {0:?}")]
    BadMagic([u8; 8]),
    #[error("truncated snapshot: expected {expected} bytes, found {actual}")]
    Truncated { expected: usize, actual: usize },
    #[error("snapshot coefficients violate the reality condition (mismatch {0:e})")]
    NotHermitian(f64),
    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("missing config key `{0}`")]
    MissingKey(String),
    #[error("invalid value for `{key}`: {msg}")]
    InvalidValue { key: String, msg: String },
}
