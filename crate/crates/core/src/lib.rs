//! Sign-based stochastic optimization: sign descent (plain and
//! value-guarded), parallel sign descent with majority vote, and
//! stochastic-sign descent with momentum, together with the
//! success-probability framework (induced gradient norms, analytical
//! lower bounds, Monte-Carlo probes) and a simulated parameter-server
//! harness with CSV transcripts.

pub mod error;
pub mod harness;
pub mod optimizers;
pub mod probes;
pub mod problems;
pub mod rng;
pub mod sign;
pub mod special;
pub mod vector;

pub use error::{Error, Result};
pub use vector::{DenseVector, SignVector};
