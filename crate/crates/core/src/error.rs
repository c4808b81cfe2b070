use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid polynomial order {0}: must be at least 1")]
    InvalidOrder(usize),

    #[error("degenerate basis: nodes {0} and {1} coincide")]
    DegenerateBasis(usize, usize),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("solution blew up at step {step}: {reason}")]
    BlowUp { step: usize, reason: String },

    #[error("initialisation failed: {0}")]
    Init(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
