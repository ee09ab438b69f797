use thiserror::Error;

use crate::gaussian::ModeId;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid adjacency matrix: {0}")]
    InvalidGraph(String),
    #[error("adjacency matrix is not self-inverse and bipartite")]
    NotSelfInverseBipartite,
    #[error("unphysical Gaussian state: {0}")]
    Unphysical(String),
    #[error("unknown mode {0}")]
    UnknownMode(ModeId),
    #[error("duplicate mode label {0}")]
    DuplicateMode(ModeId),
    #[error("two-mode operation needs distinct modes, got {0} twice")]
    SameMode(ModeId),
    #[error("invalid quadrature form: {0}")]
    InvalidForm(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("bin {bin} has no complete nullifier neighbourhood in a {window}-bin window without wrap")]
    OutsideWindow { bin: i64, window: usize },
    #[error("no threshold crossing between {lo} dB and {hi} dB")]
    NoCrossing { lo: f64, hi: f64 },
    #[error("unknown figure id `{0}`")]
    UnknownFigure(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
