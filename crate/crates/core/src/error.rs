use std::path::PathBuf;

use thiserror::Error;

use crate::game::StrategyProfile;
use crate::satisficing::SatisficingPath;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Support enumeration ran out of candidates. Carries the candidate with
    /// the smallest maximum deviation gap that was seen.
    #[error("solver incomplete: no support produced a verified equilibrium (best max gap {best_gap:e})")]
    SolverIncomplete {
        best: Option<StrategyProfile>,
        best_gap: f64,
    },

    /// Case-2 verification kept failing after every budget escalation.
    #[error("worse-search incomplete after {escalations} escalations (terminal gap {terminal_gap:e})")]
    WorseSearchIncomplete {
        partial: Box<SatisficingPath>,
        escalations: usize,
        terminal_gap: f64,
    },

    #[error("parse error at `{key}`: {message}")]
    Parse { key: String, message: String },

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn parse(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            key: key.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
