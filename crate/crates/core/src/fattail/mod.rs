//! The order-statistics ("fat tail") model.
//!
//! Each window event compares only maxima: the largest base value feeding row
//! `j` must beat the largest mutant value of row `j`. The probability
//! `p_fat(N, K)` depends on ranks alone, so it is the same for every continuous
//! fitness distribution.

pub mod cover;
pub mod enumerate;
pub mod mc;
pub mod table1;
pub mod torus;

pub use cover::{
    check_direct, h_prime_event, run_cover_algorithm, sequence_probability, AlgorithmOutput,
    CoverSequence,
};
pub use enumerate::{enumerate_exact, q_exact, ExactEnumeration};
pub use mc::{algorithm_selftest, mc_p_fat, mc_p_fat_with, SelftestReport};
pub use table1::{table1_predict, Table1Options, Table1Prediction};
pub use torus::{
    eta, f_r_gap_mc, f_r_mc, f_r_truncated, torus_measure_exact, torus_measure_mc, torus_member,
    TorusPoint,
};
