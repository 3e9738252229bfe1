//! Shared error type for all modules.

/// Errors reported by library operations.
///
/// Domain failures (search exhaustion, parameters too small for the
/// block assembler, empty sampling intervals) are ordinary values
/// here; callers such as the CLI map them to exit code 1.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("base must be at least 2 (got {0})")]
    InvalidBase(u32),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A ternary block-assembly target does not fit into `eta/2`.
    /// Larger `eta` enlarges the representable range.
    #[error("assembly target {target} outside representable range |t| <= {max}; increase eta")]
    TargetOutOfRange { target: i64, max: u64 },

    #[error("search failed after {attempts} attempts: {detail}")]
    SearchFailure { attempts: u64, detail: String },

    #[error("empty sampling interval: modulus 2^nu*3^(beta+zeta) exceeds N")]
    EmptyInterval,

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("malformed b-file at line {line}: {detail}")]
    BadBfile { line: usize, detail: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
