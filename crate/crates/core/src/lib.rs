//! Exact computation of the boundary disks of Ford-disk regions attached to
//! the congruence subgroups `Gamma_0(N)`, their north-pole complexities, and
//! the constructions that force those complexities to be positive or large.

pub mod complexity;
pub mod geometry;
pub mod numtheory;
pub mod oracle;
pub mod rational;
pub mod region;
pub mod witness;

pub use rational::Rational;

/// Identifies the algorithm revision; results cached under another value are
/// not reused.
pub const ENGINE_VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "+engine.1");
