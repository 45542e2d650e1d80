use alloc::string::String;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite input to {0}")]
    NonFinite(&'static str),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("derivative order {order} exceeds the configured cap of {cap}")]
    OrderExceedsCap { order: u32, cap: u32 },
    #[error("malformed certificate: {0}")]
    MalformedCertificate(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("heat flow runs forward only; got t = {0}")]
    NegativeTime(f64),
    #[error("grid spacings differ ({0} vs {1}); resample before convolving")]
    SpacingMismatch(f64, f64),
    #[error("kernel half-width {kernel:.3} exceeds grid half-length {grid:.3}; extend the grid support by at least {needed:.3}")]
    KernelTooWide { kernel: f64, grid: f64, needed: f64 },
    #[error("graph has {edges} edges, above the deletion-contraction cap of {cap}")]
    EdgeCapExceeded { edges: usize, cap: usize },
    #[error("{what} = {value} is outside {range}")]
    OutOfRange { what: &'static str, value: f64, range: &'static str },
}

pub type Result<T> = core::result::Result<T, Error>;
