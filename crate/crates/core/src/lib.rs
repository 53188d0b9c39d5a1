//! Grained-amplitude quantum simulation laboratory.
//!
//! The crate is organised bottom-up:
//!
//! * [`state`]: grained wavefunctions, reduction, Born sampling, grains and snapshots.
//! * [`fd`]: finite-difference Schrödinger propagation, dense eigenpairs and closed-form kernels.
//! * [`aq`]: the amplitude-quantum ensemble (bubble) and its collision/accumulation cycle.
//! * [`free_aq`]: the token-reaction model of unitary rotations.
//! * [`hierarchy`]: prefix-conditioned and canonical many-body representations.
//! * [`secq`]: occupation-number bases, ladder operators and two-stage energy minimization.
//! * [`mhtm`]: multihead Turing machines.
//! * [`scenario`]: configuration, caching and the named scenarios driven by the `aqsim` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod aq;
pub mod error;
pub mod exec;
pub mod fd;
pub mod free_aq;
pub mod hierarchy;
pub mod mhtm;
pub mod rng;
pub mod scenario;
pub mod secq;
pub mod state;
pub mod units;

pub use error::{Error, Result};
pub use num_complex::Complex64 as Complex;
pub use units::Units;

/// Crate version written into every output header.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
