use thiserror::Error;

use crate::indexsets::MultiIndex;
use crate::interp::PoisednessReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("index set of size {size} exceeds the configured cap of {cap}")]
    SizeLimit { size: usize, cap: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("index set is empty")]
    EmptyIndexSet,

    #[error("duplicate multi-index {0}")]
    DuplicateIndex(MultiIndex),

    #[error("index set is not downward closed: {index} is present but {missing} is not")]
    ClosureViolation { index: MultiIndex, missing: MultiIndex },

    #[error("no relation for {0}: it is not in the border of the index set")]
    UnknownRelation(MultiIndex),

    #[error("{context}: non-finite value")]
    NonFinite { context: String },

    #[error("{path}: {message}")]
    Schema { path: String, message: String },

    #[error("{path}: alpha inside I ({alpha} belongs to the basis)")]
    AlphaInsideBasis { path: String, alpha: MultiIndex },

    #[error("{path}: {alpha} is not in the border of I")]
    AlphaNotInBorder { path: String, alpha: MultiIndex },

    #[error("{path}: coefficient row has length {found}, expected {expected}")]
    CoefficientLength {
        path: String,
        expected: usize,
        found: usize,
    },

    #[error("{path}: duplicate relation for {alpha}")]
    DuplicateRelation { path: String, alpha: MultiIndex },

    #[error("missing relation for border index {0}")]
    MissingRelation(MultiIndex),

    #[error("border index {0} has no generator in the basis")]
    Inconsistent(MultiIndex),

    #[error("eigenvalue iteration did not converge ({converged} of {size} eigenvalues deflated)")]
    NonConvergence { converged: usize, size: usize },

    #[error(
        "no random combination with a separated spectrum after {attempts} attempts; \
         inspect the criterion report"
    )]
    DegenerateSpectrum { attempts: usize },

    #[error(
        "node set is not poised: sigma_min/sigma_max = {:.3e} <= {:.3e}",
        .0.smallest_singular_value / .0.largest_singular_value,
        .0.tolerance_used
    )]
    NotPoised(Box<PoisednessReport>),

    #[error("expected {expected} nodes, found {found}")]
    NodeCount { expected: usize, found: usize },

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            path: path.into(),
            message: message.into(),
        }
    }
}
