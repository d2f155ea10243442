//! Measurements and bounds: exponential sums, discrepancy, Vinogradov counts,
//! the explicit bound evaluators and the parameter bookkeeping that ties them
//! to the generator.

pub mod bigreal;
pub mod bounds;
pub mod discrepancy;
pub mod expsum;
pub mod params;
pub mod vinogradov;

pub use bigreal::BigReal;
pub use bounds::*;
pub use discrepancy::*;
pub use expsum::*;
pub use params::*;
pub use vinogradov::*;
