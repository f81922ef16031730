//! Sudler products, Diophantine products and Birkhoff sums along irrational
//! rotations, with the temporal statistics used to study their distribution.
//!
//! The pipeline is: a [`PartialQuotientSource`] describes α; [`alpha_value`]
//! realizes `{α}` as a [`FixedPointFraction`]; the [`rotation`] engine walks the
//! orbit `{nα}` exactly modulo 1; [`birkhoff`] turns the orbit into prefix sums;
//! [`stats`] compares those sums with their predicted moments and limit laws.

pub mod alpha_spec;
pub mod birkhoff;
pub mod cf;
pub mod error;
pub mod fixed;
pub mod quadrature;
pub mod rotation;
pub mod stats;
pub mod summation;

pub use cf::{
    alpha_value, convergents, e_alpha, index_of, partial_quotients, Convergent,
    IndexedConvergents, PartialQuotientSource, SourceKind,
};
pub use error::{Error, Result};
pub use fixed::FixedPointFraction;

/// Crate version recorded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Working precision for a run with horizon `m`: `max(192, 2 ceil(log2 m) + 96)`.
pub fn default_bits(m: u64) -> u32 {
    let log2 = if m <= 1 { 0 } else { 64 - (m - 1).leading_zeros() };
    192.max(2 * log2 + 96)
}
