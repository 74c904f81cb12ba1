//! Local fitness maxima in the Kauffman–Levin NK model.
//!
//! The central quantity is `p(N, K)`, the probability that a fixed genome is
//! fitter than all `N` of its single-flip neighbors; the expected number of
//! local maxima is `2^N p(N, K)`. The crate provides:
//!
//! - [`model`]: fitness tables, the zero genome's neighborhood, neighbor-dominance
//!   events and CDFs of sums of fitness picks for five distributions.
//! - [`estimate`]: direct and conditional Monte Carlo estimators, plus the
//!   normal-case bounding integral and its saddle point.
//! - [`fattail`]: the order-statistics ("fat tail") version of the model, exact
//!   covering-sequence probabilities, torus integrals and the asymptotic predictor.
//! - [`k1exact`]: the exact `K = 1` fat-tail recursion, its Riccati generating
//!   function and the growth constant from a Bessel-function root.
//! - [`cli`]: the `nk` command-line front end.
//!
//! Monte Carlo routines take explicit seeds and are bit-reproducible for any
//! rayon worker count (see [`mc`]).

pub mod cli;
pub mod error;
pub mod estimate;
pub mod fattail;
pub mod k1exact;
pub mod mc;
pub mod model;
pub mod quad;

pub use error::{NkError, Result};
pub use mc::Estimate;
pub use model::{DistributionKind, ModelParams};
