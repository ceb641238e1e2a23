//! Sampling-based percentile optimization with a posteriori certificates on
//! the optimality gap.
//!
//! A problem is solved by keeping the best of `n_p` uniform draws, which
//! lands in the top `eps` fraction of the decision space with probability
//! `1 - (1 - eps)^n_p`. [`certify`] bounds how far that solution can sit from
//! the true optimum by re-sampling a variance function, and [`repetitive`]
//! bounds the gap across a family of problems solved over and over.

// `!(x > 0.0)` style checks also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certify;
pub mod error;
pub mod experiment;
pub mod mpc;
pub mod oracle;
pub mod percentile;
pub mod problems;
pub mod repetitive;
pub mod rng;
pub mod space;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
