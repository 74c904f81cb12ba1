//! Modified Bessel functions of fractional order and the `K = 1` growth constant.
//!
//! `I_ν` uses the ascending series. `K_ν` uses the reflection formula
//! `π (I_{-ν} - I_ν) / (2 sin πν)` for `x <= 2`; above that the two terms
//! cancel badly (at `x = 10` about eight digits are lost), so `K_ν` comes from
//! Steed's continued fraction followed by upward recurrence in the order.

use serde::Serialize;
use statrs::function::gamma::gamma;

use crate::error::{NkError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BesselKind {
    I,
    K,
}

/// Orders the evaluator is validated for.
pub const SUPPORTED_ORDERS: [f64; 5] = [1.0 / 3.0, -1.0 / 3.0, 2.0 / 3.0, -2.0 / 3.0, 0.5];
pub const MAX_ARG: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BesselEval {
    pub kind: BesselKind,
    pub nu: f64,
    pub x: f64,
    pub value: f64,
}

fn is_supported(nu: f64) -> bool {
    SUPPORTED_ORDERS.iter().any(|&o| (o - nu).abs() < 1e-12)
}

/// `I_ν(x)` or `K_ν(x)` for `ν ∈ {±1/3, ±2/3, 1/2}` and `0 < x <= 10`.
pub fn bessel_modified(kind: BesselKind, nu: f64, x: f64) -> Result<BesselEval> {
    if !is_supported(nu) {
        if kind == BesselKind::K && nu.fract() == 0.0 {
            return Err(NkError::invalid("integer order is singular for the reflection formula"));
        }
        return Err(NkError::invalid(format!(
            "order {nu} not supported; use one of ±1/3, ±2/3, 1/2"
        )));
    }
    if !(x > 0.0 && x <= MAX_ARG) {
        return Err(NkError::invalid(format!("argument must lie in (0, {MAX_ARG}], got {x}")));
    }
    let value = match kind {
        BesselKind::I => bessel_i(nu, x),
        BesselKind::K => bessel_k(nu, x),
    };
    Ok(BesselEval { kind, nu, x, value })
}

/// Ascending series `Σ (x/2)^(2m+ν) / (m! Γ(m+ν+1))`; all terms positive for `ν > -1`.
pub(crate) fn bessel_i(nu: f64, x: f64) -> f64 {
    let half = 0.5 * x;
    let q = half * half;
    let mut term = half.powf(nu) / gamma(nu + 1.0);
    let mut sum = term;
    for m in 1..200 {
        let mf = m as f64;
        term *= q / (mf * (mf + nu));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

const REFLECTION_MAX_X: f64 = 2.0;

pub(crate) fn bessel_k(nu: f64, x: f64) -> f64 {
    let nu = nu.abs();
    if x <= REFLECTION_MAX_X {
        let s = (std::f64::consts::PI * nu).sin();
        std::f64::consts::PI * (bessel_i(-nu, x) - bessel_i(nu, x)) / (2.0 * s)
    } else {
        bessel_k_steed(nu, x)
    }
}

/// Steed's CF2 for `K_μ`, `K_{μ+1}` with `|μ| <= 1/2`, then recurrence up to `ν`.
fn bessel_k_steed(nu: f64, x: f64) -> f64 {
    let nl = (nu + 0.5).floor() as usize;
    let mu = nu - nl as f64;
    let mu2 = mu * mu;
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut delh = d;
    let mut h = d;
    let (mut q1, mut q2) = (0.0, 1.0);
    let a1 = 0.25 - mu2;
    let mut c = a1;
    let mut q = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..10_000 {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < 1e-17 {
            break;
        }
    }
    h *= a1;
    let mut k_mu = (std::f64::consts::PI / (2.0 * x)).sqrt() * (-x).exp() / s;
    let mut k_next = k_mu * (mu + x + 0.5 - h) / x;
    for i in 1..=nl {
        let t = (mu + i as f64) * (2.0 / x) * k_next + k_mu;
        k_mu = k_next;
        k_next = t;
    }
    k_mu
}

/// `A = -π√3/3`, fixed by requiring the Riccati solution to be analytic at 0.
pub const A_CONST: f64 = -std::f64::consts::PI * 1.732_050_807_568_877_2 / 3.0;

fn bessel_arg(z: f64) -> f64 {
    (2.0 / 3.0) * (2.0 * z).sqrt()
}

/// Denominator of the Bessel-ratio solution of the generating-function ODE;
/// its first positive zero is the radius of convergence `z_0`.
pub fn den(z: f64) -> f64 {
    let a = bessel_arg(z);
    let (s2, sz) = (std::f64::consts::SQRT_2, z.sqrt());
    sz * (-A_CONST * s2 * bessel_i(2.0 / 3.0, a) + A_CONST * sz * bessel_i(-1.0 / 3.0, a)
        + s2 * bessel_k(2.0 / 3.0, a)
        + sz * bessel_k(1.0 / 3.0, a))
}

/// The four-term Bessel expression whose root defines the growth constant,
/// written with integer and `π` coefficients. Equals `3 den(z)/√z`.
pub fn growth_equation(z: f64) -> f64 {
    let a = bessel_arg(z);
    let pi = std::f64::consts::PI;
    pi * 6f64.sqrt() * bessel_i(2.0 / 3.0, a) - pi * (3.0 * z).sqrt() * bessel_i(-1.0 / 3.0, a)
        + 3.0 * std::f64::consts::SQRT_2 * bessel_k(2.0 / 3.0, a)
        + 3.0 * z.sqrt() * bessel_k(1.0 / 3.0, a)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Z0Report {
    pub z0: f64,
    /// `-ln z_0`, the exponential growth rate of `p_N`.
    pub growth_rate: f64,
    pub den_at_root: f64,
    pub growth_equation_at_root: f64,
    pub bracket: (f64, f64),
}

/// Smallest zero of [`den`] in `(1, 3)` by grid scan and bisection.
pub fn find_z0(tol: f64) -> Result<Z0Report> {
    if !(tol >= 1e-10) {
        return Err(NkError::invalid("tolerance must be at least 1e-10"));
    }
    let (lo_end, hi_end) = (1.0, 3.0);
    let steps = 200;
    let h = (hi_end - lo_end) / steps as f64;
    let mut bracket = None;
    let mut prev = den(lo_end + 1e-9);
    for i in 1..=steps {
        let z = lo_end + i as f64 * h;
        let z = if i == steps { hi_end - 1e-9 } else { z };
        let v = den(z);
        if prev.signum() != v.signum() {
            bracket = Some((z - h, z));
            break;
        }
        prev = v;
    }
    let Some((mut a, mut b)) = bracket else {
        return Err(NkError::numeric("no sign change of den on (1, 3)"));
    };
    let found = (a, b);
    let fa_sign = den(a).signum();
    while b - a > tol * 0.5 {
        let m = 0.5 * (a + b);
        if den(m).signum() == fa_sign {
            a = m;
        } else {
            b = m;
        }
    }
    let z0 = 0.5 * (a + b);
    Ok(Z0Report {
        z0,
        growth_rate: -z0.ln(),
        den_at_root: den(z0),
        growth_equation_at_root: growth_equation(z0),
        bracket: found,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad;

    /// `K_ν(x) = ∫_0^∞ exp(-x cosh t) cosh(νt) dt`.
    fn k_by_quadrature(nu: f64, x: f64) -> f64 {
        let t_max = (1.0 + 45.0 / x).acosh();
        quad::integrate(|t| (-x * t.cosh()).exp() * (nu * t).cosh(), 0.0, t_max, 1e-14, 4000)
            .unwrap()
            .value
    }

    /// `I_ν(x) = (1/π)∫_0^π e^{x cos t} cos(νt) dt - (sin νπ/π)∫_0^∞ e^{-x cosh t - νt} dt`.
    fn i_by_quadrature(nu: f64, x: f64) -> f64 {
        let pi = std::f64::consts::PI;
        let a = quad::integrate(|t| (x * t.cos()).exp() * (nu * t).cos(), 0.0, pi, 1e-14, 4000)
            .unwrap()
            .value;
        let t_max = (1.0 + 45.0 / x).acosh() + 40.0;
        let b = quad::integrate(|t| (-x * t.cosh() - nu * t).exp(), 0.0, t_max, 1e-14, 4000)
            .unwrap()
            .value;
        a / pi - (nu * pi).sin() / pi * b
    }

    #[test]
    fn half_order_closed_forms() {
        let i = bessel_modified(BesselKind::I, 0.5, 1.0).unwrap().value;
        let want = (2.0 / std::f64::consts::PI).sqrt() * 1f64.sinh();
        assert!((i / want - 1.0).abs() < 1e-13);
        assert!((i - 0.937674).abs() < 1e-6);
        for x in [0.3, 1.0, 2.5, 7.0, 10.0] {
            let k = bessel_modified(BesselKind::K, 0.5, x).unwrap().value;
            let want = (std::f64::consts::PI / (2.0 * x)).sqrt() * (-x as f64).exp();
            assert!((k / want - 1.0).abs() < 1e-12, "x={x}: {k} vs {want}");
        }
        let k1 = bessel_modified(BesselKind::K, 0.5, 1.0).unwrap().value;
        assert!((k1 - 0.461068).abs() < 1e-6);
    }

    #[test]
    fn matches_integral_representations() {
        for nu in SUPPORTED_ORDERS {
            for x in [0.1, 0.7, 1.5, 2.0, 2.01, 4.0, 10.0] {
                let i = bessel_modified(BesselKind::I, nu, x).unwrap().value;
                let iq = i_by_quadrature(nu, x);
                assert!((i / iq - 1.0).abs() < 1e-12, "I nu={nu} x={x}: {i} vs {iq}");
                let k = bessel_modified(BesselKind::K, nu, x).unwrap().value;
                let kq = k_by_quadrature(nu, x);
                assert!((k / kq - 1.0).abs() < 1e-12, "K nu={nu} x={x}: {k} vs {kq}");
            }
        }
    }

    #[test]
    fn both_k_routes_agree_near_the_switch() {
        for nu in [1.0 / 3.0, 2.0 / 3.0] {
            for x in [1.0, 1.5, 2.0] {
                let a = bessel_k(nu, x);
                let b = bessel_k_steed(nu, x);
                assert!((a / b - 1.0).abs() < 1e-13, "nu={nu} x={x}");
            }
        }
    }

    #[test]
    fn i_positive_and_increasing() {
        for nu in SUPPORTED_ORDERS {
            let mut prev = 0.0;
            for i in 1..=1000 {
                let x = i as f64 * 0.01;
                let v = bessel_modified(BesselKind::I, nu, x).unwrap().value;
                assert!(v > 0.0);
                // I_ν with ν < 0 decreases near 0 before turning up
                if nu > 0.0 {
                    assert!(v > prev, "nu={nu} x={x}");
                }
                prev = v;
            }
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(bessel_modified(BesselKind::K, 1.0, 1.0).is_err());
        assert!(bessel_modified(BesselKind::I, 0.25, 1.0).is_err());
        assert!(bessel_modified(BesselKind::I, 0.5, 0.0).is_err());
        assert!(bessel_modified(BesselKind::I, 0.5, 10.5).is_err());
        assert!(find_z0(1e-12).is_err());
    }

    #[test]
    fn z0_value() {
        let r = find_z0(1e-10).unwrap();
        assert!((r.z0 - 1.803_034_611).abs() < 1e-6, "{r:?}");
        assert!((r.growth_rate + 0.589_471_14).abs() < 1e-6);
        // independent root finder output: 1.80303461136967
        assert!((r.z0 - 1.803_034_611_369_67).abs() < 1e-9);
        assert!(r.growth_equation_at_root.abs() < 1e-8);
        assert!((growth_equation(1.3) - 3.0 * den(1.3) / 1.3f64.sqrt()).abs() < 1e-12);
    }
}
