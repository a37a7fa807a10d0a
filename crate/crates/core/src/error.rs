use crate::linalg::LinalgError;
use crate::sgraph::GraphError;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("gauge has {found} entries, graph has {expected} vertices")]
    GaugeDimension { expected: usize, found: usize },
    #[error("delta must exceed 1, got {0}")]
    DeltaOutOfRange(f64),
    #[error("gain margin must be positive, got {0}")]
    NonPositiveMargin(f64),
    #[error("index must be positive, got {0}")]
    NonPositiveIndex(f64),
    #[error("the union of the two layers is not strongly connected")]
    NotStronglyConnected,
    #[error("the two layers are sign-consistent; this analysis needs a sign-inconsistent pair")]
    SignConsistent,
    #[error("the two layers are sign-inconsistent; this analysis needs a sign-consistent pair")]
    SignInconsistent,
    #[error("the union is structurally unbalanced; a gauge is required")]
    Unbalanced,
    #[error("at least two agents are required, got {0}")]
    TooFewAgents(usize),
    #[error("Lyapunov solution is not positive definite")]
    NotPositiveDefinite,
    #[error("Lyapunov residual {0:e} exceeds tolerance")]
    ResidualTooLarge(f64),
    #[error("invalid parameter {name}: {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("state vector has {found} entries, expected {expected}")]
    StateDimension { expected: usize, found: usize },
    #[error("trajectory diverged at t = {t}")]
    DivergenceDetected { t: f64 },
}
