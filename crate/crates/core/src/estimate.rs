//! Monte Carlo estimators of `p(N, K)` and the normal-case bounding integral.
//!
//! The direct estimator averages the indicator that the zero genome is a local
//! maximum. The conditional estimator integrates out the mutant fitnesses: given
//! the base values, the window events are independent with probabilities
//! `F^{(K+1)}(window sum)`, so each draw contributes the product of those CDFs.

use serde::Serialize;

use crate::error::{NkError, Result};
use crate::mc::{run_chunked, Estimate, Method};
use crate::fattail::mc_p_fat;
use crate::model::{
    ln_std_normal_cdf, zero_is_lfm_fast, DistributionKind, ModelParams, NeighborhoodSample,
    SumCdf,
};
use crate::quad;

fn check_samples(n: u64) -> Result<()> {
    if n == 0 {
        return Err(NkError::invalid("number of samples must be at least 1"));
    }
    Ok(())
}

/// Mean of the local-maximum indicator over `n` independent neighborhoods.
pub fn direct_mc(params: &ModelParams, n: u64, seed: u64) -> Result<Estimate> {
    check_samples(n)?;
    let p = *params;
    let m = run_chunked(
        n,
        seed,
        || (NeighborhoodSample::zeroed(p.n, p.k), Vec::new()),
        |rng, (sample, scratch)| {
            sample.redraw(p.dist, rng, scratch);
            if zero_is_lfm_fast(sample) {
                1.0
            } else {
                0.0
            }
        },
    );
    Ok(Estimate::from_moments(&m, seed, Method::Direct))
}

/// Product of `F^{(K+1)}` over the `N` cyclic window sums of one draw of base values.
///
/// Accumulated as a sum of logs and exponentiated once.
pub fn conditional_product(cdf: &SumCdf, y: &[f64], k: usize) -> f64 {
    let n = y.len();
    let mut window: f64 = (0..=k).map(|i| y[i % n]).sum();
    let mut log_sum = 0.0;
    for j in 0..n {
        if j > 0 {
            window += y[(j + k) % n] - y[j - 1];
        }
        log_sum += cdf.ln_cdf(window);
        if log_sum == f64::NEG_INFINITY {
            return 0.0;
        }
    }
    log_sum.exp()
}

/// Conditional (Rao–Blackwellized) estimator: mutant values are integrated out exactly.
///
/// Only the `N` base values are drawn per sample. Ties among them do not affect
/// the product, so no tie rejection is applied here.
pub fn conditional_mc(params: &ModelParams, n: u64, seed: u64) -> Result<Estimate> {
    check_samples(n)?;
    let p = *params;
    let cdf = SumCdf::new(p.dist, p.k + 1)?;
    let m = run_chunked(
        n,
        seed,
        || vec![0.0; p.n],
        |rng, y| {
            y.iter_mut().for_each(|v| *v = p.dist.sample(rng));
            conditional_product(&cdf, y, p.k)
        },
    );
    Ok(Estimate::from_moments(&m, seed, Method::Conditional))
}

fn check_nk(n: usize, k: usize) -> Result<()> {
    if k == 0 || k >= n {
        return Err(NkError::invalid(format!("need 1 <= k < n, got n={n}, k={k}")));
    }
    Ok(())
}

/// `log I(x)` where `I(x) = Φ(x √((K+1)/N))^N φ(x)` is the integrand of the
/// normal-case upper bound.
pub fn log_bound_integrand(n: usize, k: usize, x: f64) -> f64 {
    let a = ((k + 1) as f64 / n as f64).sqrt();
    -0.5 * (2.0 * std::f64::consts::PI).ln() + n as f64 * ln_std_normal_cdf(a * x) - 0.5 * x * x
}

/// `∫ Φ(x √((K+1)/N))^N φ(x) dx`, an upper bound on `p(N, K)` for normal fitness.
pub fn normal_upper_bound(n: usize, k: usize, tol: f64) -> Result<f64> {
    check_nk(n, k)?;
    if !(tol > 0.0) {
        return Err(NkError::invalid("tolerance must be positive"));
    }
    let half_width = 8.0 * (n as f64 / (k + 1) as f64).sqrt() + 10.0;
    let q = quad::integrate(
        |x| log_bound_integrand(n, k, x).exp(),
        -half_width,
        half_width,
        tol,
        20_000,
    )?;
    Ok(q.value)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SaddleReport {
    /// Maximizer of `log I`.
    pub x_max: f64,
    /// `M = log I(x_max)`.
    pub log_i_max: f64,
    /// Probe point `sqrt((2N/(K+1)) log(K+1))`.
    pub x0: f64,
    pub log_i_x0: f64,
}

/// Derivative of `log I`; `φ/Φ` is taken in log space.
fn log_bound_slope(n: usize, k: usize, x: f64) -> f64 {
    let a = ((k + 1) as f64 / n as f64).sqrt();
    let z = a * x;
    let ln_pdf = -0.5 * z * z - 0.5 * (2.0 * std::f64::consts::PI).ln();
    n as f64 * a * (ln_pdf - ln_std_normal_cdf(z)).exp() - x
}

const GOLDEN_TOL: f64 = 1e-8;

/// Locates the maximum of the (log-concave) bound integrand by golden-section search.
pub fn normal_saddle(n: usize, k: usize) -> Result<SaddleReport> {
    check_nk(n, k)?;
    if k < 2 {
        return Err(NkError::invalid("saddle diagnostics need k >= 2"));
    }
    let x0 = ((2.0 * n as f64 / (k + 1) as f64) * ((k + 1) as f64).ln()).sqrt();
    let mut lo = 0.0;
    let mut hi = x0.max(1.0);
    while log_bound_slope(n, k, hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 1e8 {
            return Err(NkError::numeric("could not bracket the saddle"));
        }
    }
    let f = |x: f64| log_bound_integrand(n, k, x);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > GOLDEN_TOL {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x_max = 0.5 * (a + b);
    Ok(SaddleReport {
        x_max,
        log_i_max: f(x_max),
        x0,
        log_i_x0: f(x0),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistRow {
    pub dist: DistributionKind,
    pub estimate: Estimate,
    /// `p̂_F + 4σ_F >= p̂_fat - 4σ_fat`.
    pub at_least_fat: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistComparison {
    pub n: usize,
    pub k: usize,
    pub fat: Estimate,
    pub rows: Vec<DistRow>,
}

/// Direct estimates of `p_F(N, K)` for every built-in `F`, next to `p_fat(N, K)`.
///
/// Each distribution uses `seed`; the fat-tail run uses `seed + 1`.
pub fn compare_dists(n: usize, k: usize, samples: u64, seed: u64) -> Result<DistComparison> {
    check_nk(n, k)?;
    check_samples(samples)?;
    let fat = mc_p_fat(n, k, samples, seed.wrapping_add(1))?;
    let mut rows = Vec::new();
    for dist in DistributionKind::ALL {
        let estimate = direct_mc(&ModelParams::new(n, k, dist)?, samples, seed)?;
        let at_least_fat = estimate.p_hat + 4.0 * estimate.stderr >= fat.p_hat - 4.0 * fat.stderr;
        rows.push(DistRow { dist, estimate, at_least_fat });
    }
    Ok(DistComparison { n, k, fat, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: usize, k: usize, d: DistributionKind) -> ModelParams {
        ModelParams::new(n, k, d).unwrap()
    }

    #[test]
    fn rejects_zero_samples() {
        let p = params(4, 1, DistributionKind::Normal);
        assert!(direct_mc(&p, 0, 1).is_err());
        assert!(conditional_mc(&p, 0, 1).is_err());
    }

    #[test]
    fn direct_mc_is_reproducible() {
        let p = params(6, 2, DistributionKind::Cauchy);
        assert_eq!(direct_mc(&p, 40_000, 9).unwrap(), direct_mc(&p, 40_000, 9).unwrap());
    }

    #[test]
    fn exchangeable_pair_gives_one_third() {
        for dist in DistributionKind::ALL {
            let p = params(2, 1, dist);
            let e = direct_mc(&p, 300_000, 5).unwrap();
            assert!(e.covers(1.0 / 3.0, 4.0), "{dist}: {e:?}");
        }
        let e = conditional_mc(&params(2, 1, DistributionKind::Normal), 100_000, 5).unwrap();
        assert!(e.covers(1.0 / 3.0, 4.0), "{e:?}");
    }

    #[test]
    fn stderr_scales_as_inverse_root_n() {
        let p = params(6, 2, DistributionKind::Uniform01);
        let a = direct_mc(&p, 100_000, 1).unwrap();
        let b = direct_mc(&p, 400_000, 2).unwrap();
        let ratio = a.stderr / b.stderr;
        assert!((ratio - 2.0).abs() < 0.4, "ratio {ratio}");
    }

    #[test]
    fn conditional_values_lie_in_unit_interval() {
        let cdf = SumCdf::new(DistributionKind::Cauchy, 3).unwrap();
        let y = [-4.0, 2.0, 0.5, 7.0, -0.2];
        let v = conditional_product(&cdf, &y, 2);
        assert!((0.0..=1.0).contains(&v));
        // direct evaluation of the product
        let want: f64 = (0..5)
            .map(|j| cdf.cdf((0..3).map(|i| y[(j + i) % 5]).sum()))
            .product();
        assert!((v - want).abs() < 1e-14);
    }

    #[test]
    fn bound_at_two_one_is_one_third() {
        let v = normal_upper_bound(2, 1, 1e-10).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-9, "{v}");
    }

    #[test]
    fn bound_integrand_is_log_concave() {
        for (n, k) in [(12, 3), (64, 16), (200, 100)] {
            let h = 0.05;
            for i in -200..200 {
                let x = i as f64 * 0.07;
                let d2 = log_bound_integrand(n, k, x + h) - 2.0 * log_bound_integrand(n, k, x)
                    + log_bound_integrand(n, k, x - h);
                assert!(d2 <= 1e-9, "n={n} k={k} x={x} d2={d2}");
            }
        }
    }

    #[test]
    fn saddle_dominates_probe_and_matches_grid() {
        for (n, k) in [(12, 3), (64, 16), (200, 100), (2000, 1000)] {
            let r = normal_saddle(n, k).unwrap();
            assert!(r.log_i_max >= r.log_i_x0);
            // dense grid search oracle
            let (mut best_x, mut best) = (0.0, f64::NEG_INFINITY);
            for i in 0..200_000 {
                let x = i as f64 * 1e-4;
                let v = log_bound_integrand(n, k, x);
                if v > best {
                    best = v;
                    best_x = x;
                }
            }
            assert!((r.x_max - best_x).abs() < 2e-4, "n={n} k={k}");
            assert!(r.log_i_max >= best - 1e-12);
        }
    }

    #[test]
    fn saddle_location_near_probe_for_large_k() {
        let r = normal_saddle(2000, 1000).unwrap();
        assert!((r.x_max - r.x0).abs() <= 0.25 * r.x0, "{r:?}");
    }

    #[test]
    fn saddle_value_in_loose_bracket() {
        let (n, k) = (200usize, 100usize);
        let r = normal_saddle(n, k).unwrap();
        let lk = (k as f64).ln();
        let scaled = r.log_i_max / (n as f64 / k as f64);
        let lower = -(lk + 3.0 * lk.sqrt() + 6.0);
        let upper = -(lk - 3.0 * lk.ln() - 6.0);
        assert!(scaled >= lower && scaled <= upper, "{scaled} not in [{lower}, {upper}]");
    }

    #[test]
    fn saddle_rejects_k1() {
        assert!(normal_saddle(10, 1).is_err());
    }

    #[test]
    fn every_distribution_sits_above_the_fat_tail() {
        let c = compare_dists(8, 2, 100_000, 3).unwrap();
        assert_eq!(c.rows.len(), 5);
        assert!(c.rows.iter().all(|r| r.at_least_fat), "{c:?}");
        assert!(compare_dists(8, 0, 10, 1).is_err());
    }
}
