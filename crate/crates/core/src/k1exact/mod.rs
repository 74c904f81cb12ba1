//! The `K = 1` fat-tail model cut open into a chain.
//!
//! With `p_N` the probability of the sliced event on `3N + 1` variables,
//! conditioning on which variable is the maximum gives
//! `(3N+1) p_N = 2 p_{N-1} + Σ_{a+b=N-2} p_a p_b`. The generating function
//! solves a Riccati equation whose solution is a ratio of modified Bessel
//! functions; its first pole `z_0 ≈ 1.8030` fixes `p_N ≈ z_0^{-N}`.

mod bessel;
mod hstar;
mod recursion;

pub use bessel::{
    bessel_modified, den, find_z0, growth_equation, BesselEval, BesselKind, Z0Report, A_CONST,
    MAX_ARG, SUPPORTED_ORDERS,
};
pub use hstar::mc_h_star;
pub use recursion::{
    growth_rate, recursion_exact, recursion_float, riccati_residual, GrowthReport, RationalSeq,
    RiccatiReport, ScaledFloatSeq, EXACT_MAX_N, FLOAT_MAX_N, GROWTH_MIN_LEN,
};
