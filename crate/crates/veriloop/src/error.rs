use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] veriloop_core::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed state file: {0}")]
    StateFile(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("instance exceeds caps: {0}")]
    CapExceeded(String),

    #[error("invalid instance: {0}")]
    InvalidSpec(String),

    #[error("unknown check {0:?} (expected one of lemma1, lemma2, lemma3, chain_rule, lhl, collision)")]
    UnknownCheck(String),
}

impl Error {
    /// Errors caused by the caller's input rather than by a computation.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Io { .. }
                | Error::StateFile(_)
                | Error::Json(_)
                | Error::CapExceeded(_)
                | Error::InvalidSpec(_)
                | Error::UnknownCheck(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
