use std::io;

use thiserror::Error;

use crate::candidates::EmbeddingError;
use crate::config::ConfigError;
use crate::corpus::CorpusError;
use crate::eval::EvalError;
use crate::mining::MiningError;
use crate::mlm::{MlmError, WorldError};
use crate::mpb2::Mpb2Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Mlm(#[from] MlmError),
    #[error(transparent)]
    World(#[from] WorldError),
    #[error(transparent)]
    Mining(#[from] MiningError),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error(transparent)]
    Mpb2(#[from] Mpb2Error),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("trial {trial}: {source}")]
    Trial {
        trial: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn io(context: impl Into<String>, source: io::Error) -> Self {
        Error::Io { context: context.into(), source }
    }

    /// Process exit status: 2 for invalid input or configuration, 3 for a
    /// seed missing from the corpus or a vocabulary, 4 for backend
    /// transport failures, 5 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::World(_) => 2,
            Error::Corpus(e) => match e {
                CorpusError::Io(_) => 5,
                _ => 2,
            },
            Error::Mlm(e) => mlm_code(e),
            Error::Mining(e) => match e {
                MiningError::MissingSeed(_) | MiningError::OovSeed(_) => 3,
                MiningError::Mlm(m) => mlm_code(m),
                MiningError::Config(_) | MiningError::EmptySeeds | MiningError::DuplicateSeed(_) => 2,
                MiningError::Format { .. } => 2,
                _ => 5,
            },
            Error::Embedding(e) => match e {
                EmbeddingError::MissingSeed(_) => 3,
                EmbeddingError::Io(_) => 5,
                _ => 2,
            },
            Error::Mpb2(e) => match e {
                Mpb2Error::Mlm(m) => mlm_code(m),
                Mpb2Error::Corpus(_) => 5,
                _ => 2,
            },
            Error::Eval(e) => match e {
                EvalError::Io(_) => 5,
                _ => 2,
            },
            Error::Trial { source, .. } => source.exit_code(),
            Error::Io { .. } => 5,
        }
    }
}

fn mlm_code(e: &MlmError) -> i32 {
    match e {
        MlmError::Transport { .. } | MlmError::Overloaded => 4,
        MlmError::ContextTooLong { .. } | MlmError::InvalidRequest { .. } | MlmError::Capability(_) => 2,
        MlmError::Protocol(_) => 5,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(Error::from(MiningError::MissingSeed("x".into())).exit_code(), 3);
        assert_eq!(Error::from(MiningError::OovSeed("x".into())).exit_code(), 3);
        assert_eq!(Error::from(EmbeddingError::MissingSeed("x".into())).exit_code(), 3);
        let transport = MlmError::Transport { detail: "refused".into(), retryable: true };
        assert_eq!(Error::from(MiningError::Mlm(transport.clone())).exit_code(), 4);
        let nested = Error::Trial { trial: 2, source: Box::new(Error::from(transport)) };
        assert_eq!(nested.exit_code(), 4);
        assert_eq!(Error::from(ConfigError::Invalid(vec!["bad".into()])).exit_code(), 2);
        assert_eq!(Error::from(MlmError::Protocol("?".into())).exit_code(), 5);
    }
}
