//! Chunked, seed-addressed Monte Carlo execution.
//!
//! A run of `n` samples is split into chunks of [`CHUNK_SIZE`] samples. Chunk
//! `c` draws from a ChaCha8 stream selected by `(seed, c)`, so every sample is
//! fully determined by the seed and its position. Chunk summaries are merged in
//! chunk order, which makes results bit-identical for any worker count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

/// Samples per chunk. Part of the reproducibility contract: changing it changes results.
pub const CHUNK_SIZE: u64 = 1 << 14;

/// The generator for chunk `chunk` of a run seeded with `seed`.
pub fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

/// Uniform draw from the open interval (0, 1).
#[inline]
pub fn open01<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let bits = rng.next_u64() >> 11;
    (bits as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Streaming mean/variance summary (Welford), mergeable in a fixed order.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Moments {
    pub count: u64,
    pub mean: f64,
    m2: f64,
}

impl Moments {
    #[inline]
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Moments) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n = (self.count + other.count) as f64;
        let delta = other.mean - self.mean;
        let w = other.count as f64 / n;
        self.mean += delta * w;
        self.m2 += other.m2 + delta * delta * self.count as f64 * w;
        self.count += other.count;
    }

    /// Unbiased sample variance; zero for fewer than two samples.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.m2 / (self.count - 1) as f64).max(0.0)
        }
    }

    pub fn stderr(&self) -> f64 {
        if self.count == 0 {
            return 0.0;
        }
        (self.variance() / self.count as f64).sqrt()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Direct,
    Conditional,
    FatDirect,
    HStar,
    TorusIntegral,
    TorusGapIntegral,
    TorusMeasure,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Direct => "direct",
            Method::Conditional => "conditional",
            Method::FatDirect => "fat_direct",
            Method::HStar => "h_star",
            Method::TorusIntegral => "torus_integral",
            Method::TorusGapIntegral => "torus_gap_integral",
            Method::TorusMeasure => "torus_measure",
        }
    }
}

/// A Monte Carlo result.
///
/// `p_hat` is the sample mean of the per-sample values. For probability
/// estimators it lies in `[0, 1]`; for torus integrals it is the integral value.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub p_hat: f64,
    pub stderr: f64,
    pub n_samples: u64,
    pub seed: u64,
    pub method: Method,
}

impl Estimate {
    pub fn from_moments(m: &Moments, seed: u64, method: Method) -> Self {
        Estimate {
            p_hat: m.mean,
            stderr: m.stderr(),
            n_samples: m.count,
            seed,
            method,
        }
    }

    /// `|self - other| <= sigmas * sqrt(se1^2 + se2^2)`.
    pub fn agrees_with(&self, other: &Estimate, sigmas: f64) -> bool {
        let se = (self.stderr.powi(2) + other.stderr.powi(2)).sqrt();
        (self.p_hat - other.p_hat).abs() <= sigmas * se
    }

    /// `|self - exact| <= sigmas * stderr`.
    pub fn covers(&self, exact: f64, sigmas: f64) -> bool {
        (self.p_hat - exact).abs() <= sigmas * self.stderr
    }
}

/// Runs `n` samples in seed-addressed chunks and merges the per-sample values.
///
/// `init` builds per-chunk scratch state; `sample` draws one value.
pub fn run_chunked<S, I, F>(n: u64, seed: u64, init: I, sample: F) -> Moments
where
    I: Fn() -> S + Sync,
    F: Fn(&mut ChaCha8Rng, &mut S) -> f64 + Sync,
{
    let chunks = n.div_ceil(CHUNK_SIZE);
    let parts: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let len = CHUNK_SIZE.min(n - c * CHUNK_SIZE);
            let mut rng = chunk_rng(seed, c);
            let mut scratch = init();
            let mut m = Moments::default();
            for _ in 0..len {
                m.push(sample(&mut rng, &mut scratch));
            }
            m
        })
        .collect();
    let mut total = Moments::default();
    for p in &parts {
        total.merge(p);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_merge_matches_single_pass() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 / 7.0).collect();
        let mut all = Moments::default();
        xs.iter().for_each(|&x| all.push(x));
        let mut a = Moments::default();
        let mut b = Moments::default();
        xs[..313].iter().for_each(|&x| a.push(x));
        xs[313..].iter().for_each(|&x| b.push(x));
        a.merge(&b);
        assert_eq!(a.count, all.count);
        assert!((a.mean - all.mean).abs() < 1e-12);
        assert!((a.variance() - all.variance()).abs() < 1e-9);
    }

    #[test]
    fn open01_never_hits_endpoints() {
        let mut rng = chunk_rng(3, 0);
        for _ in 0..10_000 {
            let u = open01(&mut rng);
            assert!(u > 0.0 && u < 1.0);
        }
    }

    #[test]
    fn result_is_independent_of_worker_count() {
        let f = |rng: &mut ChaCha8Rng, _: &mut ()| open01(rng);
        let n = 5 * CHUNK_SIZE + 17;
        let one = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| run_chunked(n, 11, || (), f));
        let four = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(|| run_chunked(n, 11, || (), f));
        assert_eq!(one, four);
        assert_eq!(one.count, n);
    }
}
