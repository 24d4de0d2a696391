//! Offset fixed-point iteration for d-th roots of positive reals.
//!
//! The root `r` of `r^d = x` is written as `b/2 + c` and `c` is found by
//! fixed-point iteration of a map whose stability is controlled by the
//! offset `b`. Alongside the iteration itself the crate carries the tools
//! used to study it:
//!
//! - [`iteration`]: the step maps, the run driver and root recovery.
//! - [`stability`]: fixed points, derivative classification, regime tables
//!   and scans over `b`.
//! - [`baselines`]: Newton, Babylonian and Halley updates plus
//!   convergence-order estimation.
//! - [`contfrac`]: the continued fraction unrolled from the square-root map.

pub mod baselines;
pub mod contfrac;
pub mod error;
pub mod iteration;
pub mod stability;
pub mod ulp;

pub use error::{Result, RootError};
pub use iteration::{
    recover_root, run_iteration, IterationConfig, IterationTrace, RootQuery, SignConvention,
    Verdict,
};
