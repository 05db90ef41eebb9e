//! Hecke eigenvalues of level-one cusp forms, Euler local factors of
//! symmetric-power, Rankin–Selberg and triple product L-functions, and
//! partial-sum asymptotics of the squared triple product coefficients.

mod dd;
pub mod asymptotics;
pub mod eigen;
pub mod error;
pub mod identities;
mod ntt;
pub mod power_series;
pub mod report;
pub mod satake;
pub mod series;
pub mod sieve;

pub use error::{Error, Result};
