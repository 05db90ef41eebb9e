use std::io;

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("requested limit {requested} exceeds the configured budget of {max}")]
    ResourceLimit { requested: usize, max: usize },

    #[error("local factor at p={prime} has depth {available}, but depth {needed} is required")]
    Depth {
        prime: u64,
        needed: usize,
        available: usize,
    },

    #[error("grid point {point} exceeds the series length {limit}")]
    Range { point: u64, limit: usize },

    #[error("rank deficient fit: {0}")]
    Rank(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
