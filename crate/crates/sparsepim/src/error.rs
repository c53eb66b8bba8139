use thiserror::Error;

/// Errors produced by parsing, planning, and simulation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("matrix generation error: {0}")]
    Generate(String),

    #[error("invalid statistics request: {0}")]
    Stats(String),

    #[error("invalid range: {0}")]
    Range(String),

    #[error("invalid machine configuration: {0}")]
    Machine(String),

    #[error("partition plan error: {0}")]
    Plan(String),

    #[error("scheme error: {0}")]
    Scheme(String),

    #[error("execution error: {0}")]
    Exec(String),

    #[error("merge error: {0}")]
    Merge(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("config file error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
