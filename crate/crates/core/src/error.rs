use thiserror::Error;

use crate::ingest::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid steering config: {0}")]
    Config(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty corpus: {0}")]
    EmptyCorpus(&'static str),

    #[error("no records for model={model} persona={persona} dataset={dataset}")]
    MissingCell {
        model: String,
        persona: String,
        dataset: String,
    },

    #[error("relative effect undefined: zero baseline accuracy for model={model} dataset={dataset}")]
    UndefinedRelativeEffect { model: String, dataset: String },

    #[error("empty aggregate: {0}")]
    EmptyAggregate(String),

    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(&'static str),

    #[error("degenerate corpus: no document contains an indexable term")]
    DegenerateCorpus,

    #[error("anchor {0} is not in the routing memory")]
    MissingAnchor(String),

    #[error("{locator}: {message}")]
    Parse { locator: String, message: String },

    #[error("validation failed with {} error(s)", .0.errors.len())]
    Validation(Box<ValidationReport>),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn parse(locator: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            locator: locator.into(),
            message: message.into(),
        }
    }
}
