use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid sector: two_j = {two_j} is not an allowed sector for n_spins = {n_spins}")]
    InvalidSector { n_spins: usize, two_j: usize },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid operator: {0}")]
    InvalidOperator(String),

    #[error("sector mismatch: expected two_j = {expected}, got two_j = {got}")]
    SectorMismatch { expected: usize, got: usize },

    #[error("resource limit: n_spins = {n_spins} exceeds the full-space cap of {cap} bath spins")]
    ResourceLimit { n_spins: usize, cap: usize },

    #[error("undefined ratio: the coherence vanishes at t = 0")]
    UndefinedRatio,

    #[error("invalid window: {0}")]
    InvalidWindow(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("linear algebra backend failure: {0}")]
    Backend(String),
}
