use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("sketches are not compatible: {0}")]
    Mismatch(&'static str),

    #[error("accumulator overflow: total {total} + update {update} exceeds capacity")]
    Overflow { total: u64, update: u64 },

    #[error("k = {k} exceeds the limit {limit} for this sketch")]
    KTooLarge { k: usize, limit: usize },

    #[error("k must be at least 1")]
    KZero,

    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("digit {value} at position {position} is not below {m}")]
    DigitOutOfRange {
        position: usize,
        value: usize,
        m: usize,
    },

    #[error("expected {expected} digits, got {got}")]
    DigitCount { expected: usize, got: usize },

    #[error("premise violated: {0}")]
    Premise(String),

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A flow-record parse failure, positioned by line (when known) and 1-based field.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{}field {field} ({name}): {message}", line.map(|l| format!("line {l}: ")).unwrap_or_default())]
pub struct ParseError {
    pub line: Option<usize>,
    pub field: usize,
    pub name: &'static str,
    pub message: String,
}

impl ParseError {
    pub fn at_line(mut self, line: usize) -> Self {
        self.line = Some(line);
        self
    }
}
