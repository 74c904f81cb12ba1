//! Continuum limit of covering sequences on the unit circle.
//!
//! A point `x` of the `r`-torus stands for `r` window ends; window `t` is the
//! half-open arc `[x_t - β, x_t)` with `β = 1/(r - y)`. `T(y)` is the set of
//! points whose windows cover the circle, and `η(x)` is the continuum analogue
//! of the sequence probability: the product of reciprocal uncovered measures
//! seen before each pick.

use rand::Rng;
use serde::Serialize;

use crate::error::{NkError, Result};
use crate::mc::{open01, run_chunked, Estimate, Method};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TorusPoint {
    pub coords: Vec<f64>,
}

impl TorusPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(NkError::invalid("a torus point needs at least 2 coordinates"));
        }
        if coords.iter().any(|c| !(0.0..1.0).contains(c)) {
            return Err(NkError::invalid("torus coordinates must lie in [0, 1)"));
        }
        Ok(TorusPoint { coords })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

fn check_y(r: usize, y: f64) -> Result<f64> {
    if !(0.0..r as f64).contains(&y) {
        return Err(NkError::invalid(format!("need 0 <= y < r, got y={y}, r={r}")));
    }
    Ok(1.0 / (r as f64 - y))
}

/// Largest cyclic gap between consecutive sorted coordinates.
fn max_gap(sorted: &[f64]) -> f64 {
    let m = sorted.len();
    let wrap = sorted[0] + 1.0 - sorted[m - 1];
    sorted.windows(2).map(|w| w[1] - w[0]).fold(wrap, f64::max)
}

fn member_with(coords: &[f64], beta: f64, buf: &mut Vec<f64>) -> bool {
    buf.clear();
    buf.extend_from_slice(coords);
    buf.sort_unstable_by(f64::total_cmp);
    max_gap(buf) <= beta
}

/// Whether the windows ending at the coordinates of `x` cover the circle.
pub fn torus_member(x: &TorusPoint, y: f64) -> Result<bool> {
    let beta = check_y(x.dim(), y)?;
    Ok(member_with(&x.coords, beta, &mut Vec::new()))
}

/// Measure of the union of windows ending at `sorted` (already sorted, nonempty).
fn union_measure(sorted: &[f64], beta: f64) -> f64 {
    if sorted.len() == 1 {
        return beta.min(1.0);
    }
    let m = sorted.len();
    let wrap = sorted[0] + 1.0 - sorted[m - 1];
    let inner: f64 = sorted.windows(2).map(|w| (w[1] - w[0]).min(beta)).sum();
    inner + wrap.min(beta)
}

/// `η` for coordinates in emission order; infinite if some earlier prefix already covers.
fn eta_with(coords: &[f64], beta: f64, buf: &mut Vec<f64>) -> f64 {
    let mut eta = 1.0;
    buf.clear();
    for s in 1..coords.len() {
        // insert coordinate s-1 keeping buf sorted
        let c = coords[s - 1];
        let pos = buf.partition_point(|&v| v < c);
        buf.insert(pos, c);
        let uncovered = 1.0 - union_measure(buf, beta);
        if uncovered <= 0.0 {
            return f64::INFINITY;
        }
        eta /= uncovered;
    }
    eta
}

/// `η(x) = Π_s 1/M̃(s)`, with `M̃(s)` the measure left uncovered by the windows
/// of picks before `s`.
pub fn eta(x: &TorusPoint, y: f64) -> Result<f64> {
    let beta = check_y(x.dim(), y)?;
    let mut buf = Vec::new();
    if !member_with(&x.coords, beta, &mut buf) {
        return Err(NkError::invalid("eta is defined on T(y) only"));
    }
    Ok(eta_with(&x.coords, beta, &mut buf))
}

/// `λ(T(y))` in closed form, `(y/(r-y))^(r-1)`, valid for `0 <= y <= 1`.
pub fn torus_measure_exact(r: usize, y: f64) -> Result<f64> {
    check_y(r, y)?;
    if y > 1.0 {
        return Err(NkError::invalid("closed form holds for y <= 1 only"));
    }
    Ok((y / (r as f64 - y)).powi(r as i32 - 1))
}

fn check_fr(r: usize, y: f64, n: u64) -> Result<f64> {
    if r < 3 {
        return Err(NkError::invalid("f_r is defined for r >= 3"));
    }
    if !(0.0..=1.0).contains(&y) {
        return Err(NkError::invalid(format!("need 0 <= y <= 1, got {y}")));
    }
    if r == 3 && y >= 1.0 {
        return Err(NkError::invalid("f_3 diverges at y = 1"));
    }
    if n == 0 {
        return Err(NkError::invalid("number of samples must be at least 1"));
    }
    Ok(1.0 / (r as f64 - y))
}

/// `f_r(y) = ∫_{T(y)} η dλ` by uniform sampling of the torus.
pub fn f_r_mc(r: usize, y: f64, n: u64, seed: u64) -> Result<Estimate> {
    let beta = check_fr(r, y, n)?;
    let m = run_chunked(
        n,
        seed,
        || (vec![0.0; r], Vec::with_capacity(r)),
        |rng, (x, buf)| {
            x.iter_mut().for_each(|v| *v = open01(rng));
            if member_with(x, beta, buf) {
                eta_with(x, beta, buf)
            } else {
                0.0
            }
        },
    );
    Ok(Estimate::from_moments(&m, seed, Method::TorusIntegral))
}

/// One draw of `x` uniform on `T(y)`, returned in emission order.
///
/// With one point pinned at 0, `T(y)` is the union over cyclic orders of the
/// sets of gap vectors `g` with `Σ g = 1`, `g_i <= β`. Writing `u_i = β - g_i`
/// turns each into the simplex `Σ u = rβ - 1 =: c`, of volume `c^(r-1)/(r-1)!`,
/// so `λ(T(y)) = c^(r-1)` and uniform `u` with a uniform labeling samples `T(y)`.
fn draw_on_torus<R: Rng + ?Sized>(rng: &mut R, r: usize, beta: f64, x: &mut [f64], e: &mut [f64]) {
    let c = r as f64 * beta - 1.0;
    e.iter_mut().for_each(|v| *v = -open01(rng).ln());
    let total: f64 = e.iter().sum();
    let mut pos = 0.0;
    for i in 0..r {
        x[i] = pos;
        pos += beta - c * e[i] / total;
    }
    for i in (1..r).rev() {
        x.swap(i, rng.random_range(0..=i));
    }
}

/// `f_r(y)` from `λ(T(y)) · E[η]` with `x` drawn uniformly on `T(y)`.
///
/// Much lower variance than [`f_r_mc`] for small `y`, where `T(y)` is tiny.
pub fn f_r_gap_mc(r: usize, y: f64, n: u64, seed: u64) -> Result<Estimate> {
    let beta = check_fr(r, y, n)?;
    let scale = torus_measure_exact(r, y)?;
    if scale == 0.0 {
        return Ok(Estimate {
            p_hat: 0.0,
            stderr: 0.0,
            n_samples: n,
            seed,
            method: Method::TorusGapIntegral,
        });
    }
    let m = run_chunked(
        n,
        seed,
        || (vec![0.0; r], vec![0.0; r], Vec::with_capacity(r)),
        |rng, (x, e, buf)| {
            draw_on_torus(rng, r, beta, x, e);
            scale * eta_with(x, beta, buf)
        },
    );
    Ok(Estimate::from_moments(&m, seed, Method::TorusGapIntegral))
}

/// `f_r(y)` split at an `η` level `L`: the full integral, the part with
/// `η < L`, and `g(L) = ∫ η 1[η >= L]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TruncatedIntegral {
    pub full: Estimate,
    pub truncated: Estimate,
    pub level: f64,
    pub g_level: f64,
}

/// Gap-sampled `f_r(y)` with the contribution of `η >= level` reported separately.
///
/// Meant for `y = 1`, where `η` is unbounded and the integral is improper.
/// Both parts use the same draws.
pub fn f_r_truncated(r: usize, y: f64, n: u64, seed: u64, level: f64) -> Result<TruncatedIntegral> {
    if !(level > 0.0) {
        return Err(NkError::invalid("truncation level must be positive"));
    }
    let full = f_r_gap_mc(r, y, n, seed)?;
    let beta = check_fr(r, y, n)?;
    let scale = torus_measure_exact(r, y)?;
    let m = run_chunked(
        n,
        seed,
        || (vec![0.0; r], vec![0.0; r], Vec::with_capacity(r)),
        |rng, (x, e, buf)| {
            if scale == 0.0 {
                return 0.0;
            }
            draw_on_torus(rng, r, beta, x, e);
            let v = eta_with(x, beta, buf);
            if v < level {
                scale * v
            } else {
                0.0
            }
        },
    );
    let truncated = Estimate::from_moments(&m, seed, Method::TorusGapIntegral);
    Ok(TruncatedIntegral {
        g_level: full.p_hat - truncated.p_hat,
        full,
        truncated,
        level,
    })
}

/// `λ(T(y))` by uniform sampling of the torus.
pub fn torus_measure_mc(r: usize, y: f64, n: u64, seed: u64) -> Result<Estimate> {
    let beta = check_y(r, y)?;
    if r < 2 {
        return Err(NkError::invalid("need r >= 2"));
    }
    if n == 0 {
        return Err(NkError::invalid("number of samples must be at least 1"));
    }
    let m = run_chunked(
        n,
        seed,
        || (vec![0.0; r], Vec::with_capacity(r)),
        |rng, (x, buf)| {
            x.iter_mut().for_each(|v| *v = open01(rng));
            if member_with(x, beta, buf) {
                1.0
            } else {
                0.0
            }
        },
    );
    Ok(Estimate::from_moments(&m, seed, Method::TorusMeasure))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::chunk_rng;

    fn pt(c: &[f64]) -> TorusPoint {
        TorusPoint::new(c.to_vec()).unwrap()
    }

    #[test]
    fn membership_examples() {
        assert!(torus_member(&pt(&[0.0, 1.0 / 3.0, 2.0 / 3.0]), 0.5).unwrap());
        assert!(!torus_member(&pt(&[0.0, 0.3, 0.6]), 0.0).unwrap());
        assert!(!torus_member(&pt(&[0.0, 0.3]), 0.5).unwrap());
        assert!(torus_member(&pt(&[0.0, 0.3]), 2.0).is_err());
        assert!(TorusPoint::new(vec![0.2]).is_err());
        assert!(TorusPoint::new(vec![0.2, 1.0]).is_err());
    }

    #[test]
    fn membership_translation_invariant() {
        let mut rng = chunk_rng(5, 0);
        for _ in 0..2000 {
            let c: Vec<f64> = (0..4).map(|_| open01(&mut rng)).collect();
            let shift = open01(&mut rng);
            let moved: Vec<f64> = c.iter().map(|v| (v + shift).fract()).collect();
            let y = 0.9;
            assert_eq!(
                torus_member(&pt(&c), y).unwrap(),
                torus_member(&pt(&moved), y).unwrap()
            );
        }
    }

    #[test]
    fn eta_examples() {
        let even = pt(&[0.0, 1.0 / 3.0, 2.0 / 3.0]);
        let v = eta(&even, 1e-9).unwrap();
        assert!((v - 4.5).abs() < 1e-6, "{v}");
        assert!(eta(&pt(&[0.0, 0.1, 0.2]), 0.5).is_err());
        let mut rng = chunk_rng(6, 0);
        let beta = 1.0 / (4.0 - 0.7);
        let (mut x, mut e, mut buf) = (vec![0.0; 4], vec![0.0; 4], Vec::new());
        for _ in 0..1000 {
            draw_on_torus(&mut rng, 4, beta, &mut x, &mut e);
            assert!(member_with(&x.clone(), beta, &mut buf));
            assert!(eta_with(&x, beta, &mut buf) >= 1.0);
        }
    }

    #[test]
    fn first_eta_factor_is_one() {
        // a single point's window leaves 1 - β uncovered before the second pick
        let beta = 1.0 / 1.5;
        let v = eta_with(&[0.1, 0.6], beta, &mut Vec::new());
        assert!((v - 1.0 / (1.0 - beta)).abs() < 1e-12);
    }

    #[test]
    fn f_r_vanishes_at_zero() {
        for r in 3..=5 {
            assert_eq!(f_r_mc(r, 0.0, 100_000, 1).unwrap().p_hat, 0.0);
            assert_eq!(f_r_gap_mc(r, 0.0, 1000, 1).unwrap().p_hat, 0.0);
        }
    }

    #[test]
    fn samplers_agree() {
        for (r, y) in [(3, 0.5), (3, 0.9), (4, 0.8), (5, 1.0)] {
            let a = f_r_mc(r, y, 2_000_000, 2).unwrap();
            let b = f_r_gap_mc(r, y, 400_000, 3).unwrap();
            assert!(a.agrees_with(&b, 4.0), "r={r} y={y}: {a:?} {b:?}");
        }
    }

    #[test]
    fn small_y_asymptotics() {
        // f_r(y) ~ y^(r-1)/(r-1)! as y -> 0
        for r in [3usize, 4] {
            let y = 0.005;
            let f = f_r_gap_mc(r, y, 200_000, 4).unwrap().p_hat;
            let want = y.powi(r as i32 - 1) / (1..r).product::<usize>() as f64;
            assert!((f / want - 1.0).abs() < 0.02, "r={r}: {f} vs {want}");
        }
    }

    #[test]
    fn measure_matches_closed_form() {
        for (r, y) in [(3, 0.1), (3, 0.6), (4, 0.9), (5, 1.0)] {
            let e = torus_measure_mc(r, y, 1_000_000, 7).unwrap();
            let exact = torus_measure_exact(r, y).unwrap();
            assert!(e.covers(exact, 4.0), "r={r} y={y}: {e:?} vs {exact}");
        }
        assert_eq!(torus_measure_mc(3, 0.0, 10_000, 1).unwrap().p_hat, 0.0);
        assert!(torus_measure_exact(3, 1.5).is_err());
    }

    #[test]
    fn measure_monotone_in_y() {
        let ys = [0.2, 0.4, 0.6, 0.8, 1.0];
        let est: Vec<Estimate> = ys.iter().map(|&y| torus_measure_mc(4, y, 200_000, 9).unwrap()).collect();
        for w in est.windows(2) {
            assert!(w[1].p_hat + 4.0 * w[1].stderr >= w[0].p_hat);
        }
    }

    #[test]
    fn truncation_splits_the_integral() {
        let t = f_r_truncated(4, 1.0, 100_000, 5, 50.0).unwrap();
        assert!(t.g_level >= 0.0);
        assert!(t.truncated.p_hat <= t.full.p_hat);
        let loose = f_r_truncated(4, 1.0, 100_000, 5, 1e12).unwrap();
        assert!(loose.g_level.abs() < 1e-12);
        assert!(f_r_truncated(4, 1.0, 10, 5, 0.0).is_err());
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(f_r_mc(2, 0.5, 10, 1).is_err());
        assert!(f_r_mc(3, 1.0, 10, 1).is_err());
        assert!(f_r_mc(4, 1.2, 10, 1).is_err());
        assert!(f_r_mc(4, 0.5, 0, 1).is_err());
    }
}
