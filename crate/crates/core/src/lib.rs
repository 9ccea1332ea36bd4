//! Finite-scale laboratory for the rapid points of Brownian motion.
//!
//! A cell `[k 2^-n, (k+1) 2^-n]` is rapid when the path climbs at least
//! `alpha * sqrt(2 n ln 2) * 2^(-n/2)` from some point near its left end to its right
//! end. The number of rapid cells at scale `n` grows like `2^((1 - alpha^2) n)`; this
//! crate counts them on simulated paths, fits the exponent, and checks the tail
//! estimates behind that growth rate.
//!
//! - [`path`]: dyadic-grid Brownian paths and the `±1` sign codec
//! - [`rapid`]: rapid-cell counting and pointwise growth ratios
//! - [`dimension`]: exponent fits and ensemble comparison
//! - [`bounds`]: binomial and Gaussian tail estimates
//! - [`complexity`]: compressor-based incompressibility screen
//! - [`experiment`]: configuration, runner and output schema of the `rapid-dim` tool

pub mod bounds;
pub mod complexity;
pub mod dimension;
pub mod error;
pub mod experiment;
pub mod path;
pub mod rapid;

pub use error::{Error, Result};
