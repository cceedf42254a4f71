use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid graph: {0}")]
    Graph(String),
    #[error("canonical form supports at most {bound} vertices, graph has {n}")]
    CanonicalBound { n: usize, bound: usize },
    #[error("illegal move {mv}: {clause}")]
    IllegalMove { mv: String, clause: String },
    #[error("block structure: {0}")]
    Block(String),
    #[error("standard form: {0}")]
    StandardForm(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("lens parameters: {0}")]
    Lens(String),
    #[error("atlas: {0}")]
    Atlas(String),
}

pub type Result<T> = std::result::Result<T, Error>;
