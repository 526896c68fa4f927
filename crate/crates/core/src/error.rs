use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An input violated an operation's precondition.
    #[error("domain error: {0}")]
    Domain(String),

    /// A brute-force enumeration would exceed the configured cap.
    #[error("oracle scale exceeded: {requested} candidates > cap {cap}")]
    OracleScaleExceeded { requested: f64, cap: f64 },

    /// The truncation has no recurrent class.
    #[error("degenerate truncation: {0}")]
    DegenerateTruncation(String),

    /// A potential family cannot bound the requested tail.
    #[error("tail not certifiable: {0}")]
    TailNotCertifiable(String),

    /// No sign change of the pressure was found in the scanned range.
    #[error("unbracketed: scanned t in [{lo}, {hi}] without a certified {missing} point")]
    Unbracketed { lo: f64, hi: f64, missing: &'static str },

    /// A boundary-crossing decision fell inside the rounding slop.
    #[error("undecidable crossing: {0}")]
    UndecidableCrossing(String),

    /// A state space would exceed the configured size limit.
    #[error("state space too large: {states} states > limit {limit}")]
    TooManyStates { states: usize, limit: usize },

    /// A descriptor (JSON, digit list, ...) could not be parsed.
    #[error("malformed descriptor: {0}")]
    Descriptor(String),
}

pub type Result<T> = std::result::Result<T, Error>;
