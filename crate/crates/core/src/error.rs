use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A physical quantity is outside the domain of the function.
    #[error("domain error: {0}")]
    Domain(String),

    /// The 2x2 Gram matrix of the tag and user channels cannot be inverted
    /// reliably. Carries the condition-number estimate (infinite when singular).
    #[error("channels are (nearly) collinear: Gram condition number {condition:e}")]
    IllConditioned { condition: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("conic program is malformed: {0}")]
    MalformedProgram(String),

    /// Writing an output failed. Holds the rendered I/O error.
    #[error("output error: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
