use std::fmt;
use std::path::PathBuf;

/// Errors raised while loading data, configuring the engine, or persisting stores.
#[derive(Debug)]
pub enum EngineError {
    /// I/O failure while reading or writing a file.
    Io { path: PathBuf, source: std::io::Error },
    /// Invalid configuration document or option combination.
    Config(String),
    /// Malformed or unusable input data.
    Data(String),
    /// A column named in the configuration is absent from the data header.
    MissingColumn(String),
    /// A declared target column has zero parseable values.
    EmptyTarget(String),
    /// An operation referenced a column id outside the schema.
    UnknownColumn(String),
    /// A summarization call received an empty row slice.
    EmptySlice,
    /// The brute-force oracle would exceed its combination budget.
    BudgetExceeded { combinations: u128, budget: u128 },
    /// A store file could not be parsed; `line` is 1-based.
    Store { line: Option<usize>, message: String },
    /// Duplicate record key while assembling a store (internal bug).
    DuplicateKey(String),
    /// Cooperative cancellation: a deadline set by the caller expired.
    Cancelled,
}

impl fmt::Display for EngineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Io { path, source } => write!(f, "{}: {}", path.display(), source),
            Self::Config(msg) => write!(f, "invalid configuration: {}", msg),
            Self::Data(msg) => write!(f, "invalid data: {}", msg),
            Self::MissingColumn(name) => {
                write!(f, "column '{}' not found in the data header", name)
            }
            Self::EmptyTarget(name) => {
                write!(f, "target column '{}' has zero parseable values", name)
            }
            Self::UnknownColumn(name) => write!(f, "unknown column '{}'", name),
            Self::EmptySlice => write!(f, "cannot summarize an empty row slice"),
            Self::BudgetExceeded { combinations, budget } => write!(
                f,
                "oracle budget exceeded: {} subsets requested, budget is {}",
                combinations, budget
            ),
            Self::Store { line: Some(line), message } => {
                write!(f, "store line {}: {}", line, message)
            }
            Self::Store { line: None, message } => write!(f, "store: {}", message),
            Self::DuplicateKey(key) => write!(f, "duplicate store key '{}'", key),
            Self::Cancelled => write!(f, "cancelled: deadline expired"),
        }
    }
}

impl std::error::Error for EngineError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Self::Io { source, .. } => Some(source),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, EngineError>;
