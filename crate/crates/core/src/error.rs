use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the analysis and ingestion routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("no ratings for team `{team}`, indicator `{indicator}`")]
    NoData { team: String, indicator: String },

    #[error("no weighted ratings for team `{team}`, indicator `{indicator}` (every contributing weight is zero or missing)")]
    NoWeightedData { team: String, indicator: String },

    #[error("negative expertise weight {weight} for expert `{expert}`, team `{team}`")]
    NegativeWeight {
        expert: String,
        team: String,
        weight: f64,
    },

    #[error("matrix `{evaluation}` carries no expertise weights")]
    MissingExpertise { evaluation: String },

    #[error("unknown scale label `{0}`")]
    UnknownLabel(String),

    #[error("series lengths differ ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },

    #[error("need at least {needed} observations, got {got}")]
    TooFewObservations { needed: usize, got: usize },

    #[error("correlation undefined: at least one series has zero variance")]
    UndefinedCorrelation,

    #[error("ratio undefined: {0} is zero")]
    UndefinedRatio(&'static str),

    #[error("no {kind} baseline for `{key}` in {year}")]
    MissingBaseline {
        kind: &'static str,
        key: String,
        year: i32,
    },

    #[error(
        "publication `{pub_id}` has {self_citations} self-citations but only {citations} citations"
    )]
    SelfCitationsExceedTotal {
        pub_id: String,
        citations: u64,
        self_citations: u64,
    },

    #[error("evaluation `{0}` is not classifiable: no expert pair shares enough rated teams")]
    NotClassifiable(String),

    #[error("invalid matrix `{evaluation}`: {summary}")]
    InvalidMatrix { evaluation: String, summary: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{}:{line}: {message}", file.display())]
    Data {
        file: PathBuf,
        line: u64,
        message: String,
    },

    #[error("{}: {message}", path.display())]
    Io { path: PathBuf, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
