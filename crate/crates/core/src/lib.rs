//! Toeplitz sequences over the alphabet `{0, 1, 2}` and the symbolic rotation
//! sets they generate.
//!
//! Three families are provided, all built on the same nested block structure
//! ([`blocks::BlockSchedule`]):
//!
//! * [`segment`]: a greedy construction whose window averages collapse onto a
//!   line segment transverse to a chosen direction `v`;
//! * [`separator`]: a seven-interval construction whose window averages sweep
//!   around the boundary of the simplex and separate the plane;
//! * [`interior`]: a construction whose level averages hit a dense set of
//!   prescribed targets, giving a rotation set with non-empty interior.
//!
//! [`rotation`] holds the symbolic calculus (`psi`, `rho`, window clouds, sweep
//! paths) together with exact planar predicates and the sampled verification
//! checks. The crate is `no_std` and only needs `alloc`.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod blocks;
pub mod error;
pub mod interior;
pub mod report;
pub mod rotation;
pub mod segment;
pub mod separator;
pub mod sequence;
pub mod symbol;

pub use blocks::{BlockSchedule, IndexInterval, LevelRule};
pub use error::{Error, Result};
pub use report::{Report, Status};
pub use sequence::{Materialized, SymbolicSequence};
pub use symbol::{Psi, RotationVector, Symbol};

/// Default cap on the number of symbols held in memory by generators.
pub const DEFAULT_MATERIALIZATION_CAP: u64 = 10_000_000;
