use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian (max |M - M*| entry = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue = {min_eig:e})")]
    NotPsd { min_eig: f64 },

    #[error("map is not completely positive (min Choi eigenvalue = {min_eig:e})")]
    NotCp { min_eig: f64 },

    #[error("input is not a state: {0}")]
    NotAState(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid factor selector {0}, expected 1 or 2")]
    InvalidSelector(u32),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("not completely absolutely continuous (off-support residual = {residual:e})")]
    NotAbsolutelyContinuous { residual: f64 },

    #[error("PPT routes disagree: {0}")]
    RouteDisagreement(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
