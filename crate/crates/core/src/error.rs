use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("arc {0} must appear exactly twice")]
    ArcMultiplicity(u32),
    #[error("inconsistent trace: {0}")]
    Trace(String),
    #[error("invalid chord diagram: {0}")]
    Invalid(String),
    #[error("chord {0} is already 0-labelled")]
    AlreadyZero(usize),
    #[error("no chord with index {0}")]
    NoSuchChord(usize),
    #[error("chord {chord} is a {found}, expected a {expected}")]
    ChordKind { chord: usize, found: &'static str, expected: &'static str },
    #[error("unknown bichord class for chord {0}")]
    UnknownClass(usize),
    #[error("resource guard: {0}")]
    Guard(String),
    #[error("algebra: {0}")]
    Algebra(String),
}

pub type Result<T> = std::result::Result<T, Error>;
