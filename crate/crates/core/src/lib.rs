//! Reversed primes in arithmetic progressions.
//!
//! Numerical companion for digit reversal in base `g`: weakly digital
//! functions and their exponential sums, the arithmetic functions behind
//! Vaughan's identity, type I / type II prime sums, and censuses of primes by
//! the residue of their reversal.

pub mod arith;
pub mod config;
pub mod digits;
pub mod error;
pub mod expsum;
pub mod primesum;
pub mod report;
pub mod revcount;
pub mod seeds;
pub mod verify;

pub use digits as basedigits;
pub use error::{Error, Result};
