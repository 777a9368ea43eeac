//! Cohen–Lenstra style tables for K-groups of quadratic rings of integers,
//! together with an unconditional check at `p = 3` through cubic fields.

pub mod cokernel;
pub mod cubic;
pub mod error;
pub mod exactmath;
pub mod heuristics;
pub mod ktheory;
pub mod quadfields;

pub use error::{Error, Result};
