//! Matrix congruential pseudorandom generators `u_{n+1} = A u_n (mod p^t)`.
//!
//! The crate is layered bottom-up:
//!
//! - [`arith`]: exact integer matrices, polynomials and valuations.
//! - [`fieldalg`]: polynomial algebra over `F_p` and hypothesis validators.
//! - [`padic`]: order growth of `A` modulo `p^s`, lifted roots, the window
//!   constant and the expansion coefficients of shifted sequence terms.
//! - [`generator`]: the stream itself, jump-ahead and point emission.
//! - [`analysis`]: exponential sums, discrepancy, Vinogradov counts and the
//!   bound evaluators used to compare measurements against theory.

// Index loops over several parallel arrays read better than zipped iterators.
#![allow(clippy::needless_range_loop)]

pub mod analysis;
pub mod arith;
pub mod error;
pub mod fieldalg;
pub mod generator;
pub mod padic;

pub use error::{Error, Result};
