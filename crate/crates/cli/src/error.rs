use signet_core::Error as CoreError;

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    InputError = 1,
    HypothesisFailure = 2,
    Divergence = 3,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Unreadable or malformed input, or an invalid parameter.
    #[error("input error: {0}")]
    Input(String),
    /// A theorem hypothesis does not hold for the network.
    #[error("hypothesis failed: {0}")]
    Hypothesis(String),
    #[error("numerical divergence: {0}")]
    Divergence(String),
    /// Some verification trials missed tolerance.
    #[error("verification failed: {failed} of {trials} trials outside tolerance")]
    VerificationFailed { failed: usize, trials: usize },
}

impl CliError {
    pub fn status(&self) -> ExitStatus {
        match self {
            CliError::Input(_) => ExitStatus::InputError,
            CliError::Hypothesis(_) | CliError::VerificationFailed { .. } => {
                ExitStatus::HypothesisFailure
            }
            CliError::Divergence(_) => ExitStatus::Divergence,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let msg = e.to_string();
        match e {
            CoreError::DivergenceDetected { .. } => CliError::Divergence(msg),
            CoreError::DeltaOutOfRange(_)
            | CoreError::NonPositiveMargin(_)
            | CoreError::InvalidParameter { .. }
            | CoreError::StateDimension { .. }
            | CoreError::GaugeDimension { .. }
            | CoreError::Graph(_) => CliError::Input(msg),
            CoreError::Linalg(_)
            | CoreError::NonPositiveIndex(_)
            | CoreError::NotStronglyConnected
            | CoreError::SignConsistent
            | CoreError::SignInconsistent
            | CoreError::Unbalanced
            | CoreError::TooFewAgents(_)
            | CoreError::NotPositiveDefinite
            | CoreError::ResidualTooLarge(_) => CliError::Hypothesis(msg),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
