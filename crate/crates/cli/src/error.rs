use std::fmt;
use std::io;

use gapfinder::config::ConfigError;
use gapfinder::corpus::CorpusError;
use gapfinder::evaluation::EvalError;
use gapfinder::graph::GraphError;
use gapfinder::interest::InterestError;
use gapfinder::matching::MatchError;
use gapfinder::provenance::ProvenanceError;
use gapfinder::ranking::RankingError;
use gapfinder::topics::TopicError;

/// Failure classes, each with its own exit code.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Data(String),
    Stale(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Stale(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Data(m) => write!(f, "data error: {m}"),
            CliError::Stale(m) => write!(f, "stale artifact: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<ProvenanceError> for CliError {
    fn from(e: ProvenanceError) -> Self {
        match e {
            ProvenanceError::Stale { .. } => CliError::Stale(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<RankingError> for CliError {
    fn from(e: RankingError) -> Self {
        match e {
            RankingError::SchemaMismatch { .. } => CliError::Stale(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

macro_rules! data_error {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Data(e.to_string())
            }
        }
    )*};
}

data_error!(
    io::Error,
    serde_json::Error,
    CorpusError,
    GraphError,
    TopicError,
    InterestError,
    MatchError,
    EvalError
);
