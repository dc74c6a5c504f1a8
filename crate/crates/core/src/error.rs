use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid modulus p={p}, k={k}: {reason}")]
    InvalidModulus {
        p: u64,
        k: u32,
        reason: &'static str,
    },

    #[error("{value} is not a unit modulo {modulus}")]
    NotAUnit { value: i64, modulus: u64 },

    #[error("{g} is not a primitive root modulo {q}")]
    NotPrimitiveRoot { g: u64, q: u64 },

    #[error("exponent k={k} too small: {what} needs k >= {needed}")]
    ExponentTooSmall {
        k: u32,
        needed: u32,
        what: &'static str,
    },

    #[error("{what} = {value} out of range 0..={max}")]
    OutOfRange {
        what: &'static str,
        value: u64,
        max: u64,
    },

    #[error("parameters {first} and {second} coincide modulo {p}")]
    RepeatedParameter { first: i64, second: i64, p: u64 },

    #[error("{0}")]
    InvalidArgument(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("internal consistency check failed: {0}")]
    SelfCheck(String),

    #[error("dlog cache: {0}")]
    CacheFormat(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}
