use thiserror::Error;

/// Errors raised by the simulator, the training loop and the experiment runner.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum QnpgError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("qubit index {index} out of range for {n_qubits} qubits")]
    QubitIndex { index: usize, n_qubits: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("value {value} outside the domain: {what}")]
    Domain { what: &'static str, value: usize },

    #[error("policy estimate for action {action} is zero and clipping is disabled")]
    DegeneratePolicy { action: usize },

    #[error("non-finite value in {0}")]
    Numeric(&'static str),

    #[error("episode {episode}: {source}")]
    Episode {
        episode: usize,
        #[source]
        source: Box<QnpgError>,
    },

    #[error("{0}")]
    Io(String),
}

impl QnpgError {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        QnpgError::Config(msg.into())
    }

    pub(crate) fn in_episode(self, episode: usize) -> Self {
        QnpgError::Episode {
            episode,
            source: Box::new(self),
        }
    }
}

impl From<std::io::Error> for QnpgError {
    fn from(err: std::io::Error) -> Self {
        QnpgError::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, QnpgError>;
