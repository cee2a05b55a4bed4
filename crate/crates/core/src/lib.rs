//! Star-scale invariant log-correlated Gaussian fields and balanced ratios of
//! Gaussian multiplicative chaos, with the Monte Carlo machinery used to probe
//! their scaling exponents, comparison inequalities and right tails.

pub mod error;
pub mod field;
pub mod gmc;
pub mod kahane;
pub mod kernel;
pub mod quad;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
