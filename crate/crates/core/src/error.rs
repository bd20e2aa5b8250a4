use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("capacity exceeded: n = {n} is above the {engine} cap of {cap}")]
    Capacity {
        n: usize,
        cap: usize,
        engine: &'static str,
    },

    #[error("integer overflow: {0}")]
    Overflow(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("conditional probability undefined: P(T = {0}) = 0")]
    UndefinedConditional(usize),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn ensure_finite(name: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("{name} must be finite, got {x}")))
    }
}
