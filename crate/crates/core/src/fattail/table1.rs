//! Leading-order predictions of `p_fat(N, K)` for large `K` and bounded `N/K`.
//!
//! Two regimes:
//!
//! - `N = 2(K+1) - j`, `0 <= j <= K`: the two-window mass plus the three-window
//!   mass, `(1/K)(1/(K+3-j) - 1/K) + 2 log K / (K^3 (1 - j/K))`.
//! - `N = (r - y)(K+1)`, `r >= 3`, `0 <= y < 1`: `f_r(y)/K^r + f_{r+1}(1)/K^(r+1)`,
//!   with both torus integrals estimated by Monte Carlo.
//!
//! The three-window coefficient is 2 (both sides of the first window). At
//! `j = K` the factor `1 - j/K` vanishes; it is floored at `1/K` there, where
//! the two-window term dominates anyway.

use serde::Serialize;

use super::torus::{f_r_gap_mc, f_r_truncated, TruncatedIntegral};
use crate::error::{NkError, Result};
use crate::mc::Estimate;

/// Largest supported `N/K`.
pub const MAX_RATIO: f64 = 8.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Table1Options {
    /// Samples per torus integral.
    pub samples: u64,
    pub seed: u64,
    /// `η` level at which the `f_{r+1}(1)` integrand is split.
    pub truncation_level: f64,
}

impl Default for Table1Options {
    fn default() -> Self {
        Table1Options {
            samples: 400_000,
            seed: 1,
            truncation_level: 1000.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "regime", rename_all = "snake_case")]
pub enum Table1Row {
    TwoWindow {
        j: usize,
        two_window_term: f64,
        three_window_term: f64,
    },
    Torus {
        r: usize,
        y: f64,
        f_r: Estimate,
        f_r_plus_1_at_1: TruncatedIntegral,
        leading_term: f64,
        correction_term: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Table1Prediction {
    pub n: usize,
    pub k: usize,
    pub value: f64,
    pub row: Table1Row,
    pub warnings: Vec<String>,
}

pub fn table1_predict(n: usize, k: usize, opts: &Table1Options) -> Result<Table1Prediction> {
    if k == 0 || n < k + 2 {
        return Err(NkError::invalid(format!(
            "prediction needs k >= 1 and n >= k + 2, got n={n}, k={k}"
        )));
    }
    if n as f64 / k as f64 > MAX_RATIO {
        return Err(NkError::invalid(format!(
            "n/k = {:.3} exceeds the supported ratio {MAX_RATIO}",
            n as f64 / k as f64
        )));
    }
    let mut warnings = Vec::new();
    if k < 50 {
        warnings.push(format!("k = {k} is small; the prediction is asymptotic in k"));
    }
    let kf = k as f64;
    if n <= 2 * (k + 1) {
        let j = 2 * (k + 1) - n;
        let two = (1.0 / kf) * (1.0 / (kf + 3.0 - j as f64) - 1.0 / kf);
        let shrink = (1.0 - j as f64 / kf).max(1.0 / kf);
        if j == k {
            warnings.push("j = k: the factor 1 - j/k is floored at 1/k".into());
        }
        let three = 2.0 * kf.ln() / (kf.powi(3) * shrink);
        return Ok(Table1Prediction {
            n,
            k,
            value: two + three,
            row: Table1Row::TwoWindow {
                j,
                two_window_term: two,
                three_window_term: three,
            },
            warnings,
        });
    }
    let ratio = n as f64 / (k + 1) as f64;
    let r = n.div_ceil(k + 1);
    let y = r as f64 - ratio;
    let f_r = f_r_gap_mc(r, y, opts.samples, opts.seed)?;
    let f_next = f_r_truncated(r + 1, 1.0, opts.samples, opts.seed.wrapping_add(1), opts.truncation_level)?;
    let leading = f_r.p_hat / kf.powi(r as i32);
    let correction = f_next.full.p_hat / kf.powi(r as i32 + 1);
    Ok(Table1Prediction {
        n,
        k,
        value: leading + correction,
        row: Table1Row::Torus {
            r,
            y,
            f_r,
            f_r_plus_1_at_1: f_next,
            leading_term: leading,
            correction_term: correction,
        },
        warnings,
    })
}
