use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{NkError, Result};
use crate::fattail::enumerate::ratio_to_f64;

pub const EXACT_MAX_N: usize = 500;
pub const FLOAT_MAX_N: usize = 100_000;
pub const GROWTH_MIN_LEN: usize = 100;

/// `p_0..p_n` as exact rationals.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalSeq {
    pub values: Vec<BigRational>,
}

impl RationalSeq {
    pub fn n_max(&self) -> usize {
        self.values.len() - 1
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.values.iter().map(ratio_to_f64).collect()
    }
}

/// `Σ_{a+b=m} x_a x_b`, pairing symmetric terms.
fn self_convolution<T>(x: &[T], m: usize, zero: T, double: impl Fn(T) -> T) -> T
where
    T: Clone + std::ops::Add<Output = T>,
    for<'a> &'a T: std::ops::Mul<&'a T, Output = T>,
{
    let mut half = zero;
    for a in 0..m.div_ceil(2) {
        half = half + &x[a] * &x[m - a];
    }
    let mut s = double(half);
    if m % 2 == 0 {
        s = s + &x[m / 2] * &x[m / 2];
    }
    s
}

/// Exact `p_N = (2 p_{N-1} + Σ_{a+b=N-2} p_a p_b) / (3N+1)` with `p_0 = 1`.
pub fn recursion_exact(n_max: usize) -> Result<RationalSeq> {
    if n_max > EXACT_MAX_N {
        return Err(NkError::infeasible(format!(
            "exact recursion is limited to n <= {EXACT_MAX_N}"
        )));
    }
    let two = BigRational::from_integer(2.into());
    let mut p: Vec<BigRational> = Vec::with_capacity(n_max + 1);
    p.push(BigRational::one());
    for n in 1..=n_max {
        let mut s = &two * &p[n - 1];
        if n >= 2 {
            s += self_convolution(&p, n - 2, BigRational::zero(), |h| &h * &two);
        }
        p.push(s / BigRational::from_integer((3 * n + 1).into()));
    }
    Ok(RationalSeq { values: p })
}

/// `log p_0..log p_n` from floating-point arithmetic.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScaledFloatSeq {
    pub log_values: Vec<f64>,
}

impl ScaledFloatSeq {
    pub fn n_max(&self) -> usize {
        self.log_values.len() - 1
    }

    pub fn log_p(&self, n: usize) -> f64 {
        self.log_values[n]
    }
}

/// Rescale once the newest scaled value leaves `e^{±RESCALE_AT}`.
const RESCALE_AT: f64 = 40.0;

/// Same recursion on `s_n = p_n e^{cn}`; `c` follows `-log p_n / n` so the
/// stored values stay near 1 while `p_n` itself underflows past `n ≈ 1400`.
pub fn recursion_float(n_max: usize) -> Result<ScaledFloatSeq> {
    if n_max > FLOAT_MAX_N {
        return Err(NkError::infeasible(format!(
            "float recursion is limited to n <= {FLOAT_MAX_N}"
        )));
    }
    let mut c = 0.0f64;
    let mut s: Vec<f64> = Vec::with_capacity(n_max + 1);
    s.push(1.0);
    for n in 1..=n_max {
        let (e1, e2) = (c.exp(), (2.0 * c).exp());
        let mut v = 2.0 * e1 * s[n - 1];
        if n >= 2 {
            v += e2 * self_convolution(&s, n - 2, 0.0, |h| 2.0 * h);
        }
        v /= (3 * n + 1) as f64;
        s.push(v);
        let lv = v.ln();
        if lv.abs() > RESCALE_AT {
            let shift = -lv / n as f64;
            for (a, x) in s.iter_mut().enumerate() {
                *x *= (shift * a as f64).exp();
            }
            c += shift;
        }
    }
    let log_values = s.iter().enumerate().map(|(a, x)| x.ln() - c * a as f64).collect();
    Ok(ScaledFloatSeq { log_values })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GrowthReport {
    pub n: usize,
    /// `p_{n-1}/p_n`.
    pub raw_z0: f64,
    /// `log(p_n/p_{n-1})`.
    pub raw_rate: f64,
    /// Aitken Δ² applied to the last three log-ratios.
    pub rate: f64,
    pub z0: f64,
    pub log_p_over_n: f64,
}

pub fn growth_rate(seq: &ScaledFloatSeq) -> Result<GrowthReport> {
    let len = seq.log_values.len();
    if len < GROWTH_MIN_LEN {
        return Err(NkError::invalid(format!(
            "growth extrapolation needs at least {GROWTH_MIN_LEN} terms, got {len}"
        )));
    }
    let n = len - 1;
    let d = |m: usize| seq.log_p(m) - seq.log_p(m - 1);
    let (d0, d1, d2) = (d(n - 2), d(n - 1), d(n));
    let denom = d2 - 2.0 * d1 + d0;
    let rate = if denom.abs() > 1e-14 * d2.abs() {
        d2 - (d2 - d1).powi(2) / denom
    } else {
        d2
    };
    Ok(GrowthReport {
        n,
        raw_z0: (-d2).exp(),
        raw_rate: d2,
        rate,
        z0: (-rate).exp(),
        log_p_over_n: seq.log_p(n) / n as f64,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct RiccatiReport {
    pub max_abs_residual: BigRational,
    pub first_nonzero_order: Option<usize>,
    /// Orders `0..=orders_checked - 1` were compared.
    pub orders_checked: usize,
}

/// Coefficient-wise residual of `f + 3z f' = 1 + 2z f + z² f²` for the
/// truncated series `f = Σ p_n z^n`, over every order the sequence determines.
pub fn riccati_residual(seq: &RationalSeq) -> RiccatiReport {
    let p = &seq.values;
    let two = BigRational::from_integer(2.into());
    let mut max = BigRational::zero();
    let mut first = None;
    for n in 0..p.len() {
        let lhs = &p[n] * BigRational::from_integer((3 * n + 1).into());
        let mut rhs = if n == 0 { BigRational::one() } else { &two * &p[n - 1] };
        if n >= 2 {
            rhs += self_convolution(p, n - 2, BigRational::zero(), |h| &h * &two);
        }
        let r = (lhs - rhs).abs();
        if !r.is_zero() && first.is_none() {
            first = Some(n);
        }
        if r > max {
            max = r;
        }
    }
    RiccatiReport {
        max_abs_residual: max,
        first_nonzero_order: first,
        orders_checked: p.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(BigInt::from(a), BigInt::from(b))
    }

    #[test]
    fn first_terms() {
        let s = recursion_exact(3).unwrap();
        assert_eq!(s.values[0], q(1, 1));
        assert_eq!(s.values[1], q(1, 2));
        assert_eq!(s.values[2], q(2, 7));
        // (2·2/7 + 2·1·1/2)/10 = (4/7 + 1)/10
        assert_eq!(s.values[3], q(11, 70));
    }

    #[test]
    fn alternate_sum_form_agrees() {
        let s = recursion_exact(40).unwrap();
        let p = &s.values;
        for n in 1..=40usize {
            let mut sum = BigRational::zero();
            for j in 2..=n {
                sum += &p[j - 2] * &p[n - j];
            }
            let v = (q(2, 1) * &p[n - 1] + sum) / q(3 * n as i64 + 1, 1);
            assert_eq!(v, p[n]);
        }
    }

    #[test]
    fn exact_sequence_is_a_decreasing_probability() {
        let s = recursion_exact(120).unwrap();
        for w in s.values[1..].windows(2) {
            assert!(w[1] < w[0]);
            assert!(w[1] > BigRational::zero());
        }
        assert!(recursion_exact(EXACT_MAX_N + 1).is_err());
    }

    #[test]
    fn float_matches_exact() {
        let e = recursion_exact(200).unwrap();
        let f = recursion_float(200).unwrap();
        assert!((f.log_p(1) + 2f64.ln()).abs() < 1e-15);
        for (n, x) in e.values.iter().enumerate() {
            let want = ratio_to_f64(x).ln();
            let got = f.log_p(n);
            assert!((got.exp() / want.exp() - 1.0).abs() < 1e-12 || (got - want).abs() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn float_survives_underflow_and_rescaling() {
        let f = recursion_float(5000).unwrap();
        assert!(f.log_values.iter().all(|v| v.is_finite()));
        // far past the double range
        assert!(f.log_p(5000) < -2000.0);
        for w in f.log_values[1..].windows(2) {
            assert!(w[1] < w[0]);
        }
        let g = recursion_float(1500).unwrap();
        for n in 0..=1500 {
            assert!((f.log_p(n) - g.log_p(n)).abs() < 1e-9 * (1.0 + g.log_p(n).abs()));
        }
    }

    #[test]
    fn log_p_over_n_rises_to_the_rate() {
        // supermultiplicative: log p_n / n increases to its supremum
        let f = recursion_float(2000).unwrap();
        let r = growth_rate(&f).unwrap();
        let v: Vec<f64> = (1..=2000).map(|n| f.log_p(n) / n as f64).collect();
        for w in v.windows(2) {
            assert!(w[1] > w[0]);
        }
        assert!(v.iter().all(|&x| x < r.rate));
    }

    #[test]
    fn riccati_is_exact() {
        let s = recursion_exact(50).unwrap();
        let r = riccati_residual(&s);
        assert!(r.max_abs_residual.is_zero());
        assert_eq!(r.first_nonzero_order, None);
        assert_eq!(r.orders_checked, 51);
        let mut bad = s.clone();
        bad.values[5] += q(1, 1000);
        let r = riccati_residual(&bad);
        assert_eq!(r.first_nonzero_order, Some(5));
        let mut bad0 = s.clone();
        bad0.values[0] = q(2, 1);
        assert_eq!(riccati_residual(&bad0).first_nonzero_order, Some(0));
    }

    #[test]
    fn growth_routes_agree() {
        let f = recursion_float(2000).unwrap();
        let r = growth_rate(&f).unwrap();
        let z = super::super::bessel::find_z0(1e-10).unwrap();
        assert!((r.raw_z0 - 1.803_034_611).abs() < 5e-3);
        assert!((r.rate + 0.589_471_14).abs() < 5e-3);
        assert!((r.z0 - z.z0).abs() <= (r.raw_z0 - z.z0).abs() + 1e-12);
        assert!((r.raw_z0 - z.z0).abs() < 1e-2);
        assert!(growth_rate(&recursion_float(50).unwrap()).is_err());
    }
}
