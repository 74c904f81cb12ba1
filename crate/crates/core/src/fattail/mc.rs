use rayon::prelude::*;
use serde::Serialize;

use crate::error::{NkError, Result};
use crate::mc::{chunk_rng, run_chunked, Estimate, Method, CHUNK_SIZE};
use crate::model::{DistributionKind, NeighborhoodSample};

use super::cover::{check_direct, run_cover_algorithm};

/// Monte Carlo estimate of `p_fat(N, K)` from uniform draws.
pub fn mc_p_fat(n: usize, k: usize, samples: u64, seed: u64) -> Result<Estimate> {
    mc_p_fat_with(n, k, samples, seed, DistributionKind::Uniform01)
}

/// As [`mc_p_fat`], pushing the same uniforms through the quantile of `dist`.
///
/// The event depends on ranks only and every quantile is strictly increasing,
/// so the verdict stream, and hence the estimate, is identical for every `dist`.
pub fn mc_p_fat_with(
    n: usize,
    k: usize,
    samples: u64,
    seed: u64,
    dist: DistributionKind,
) -> Result<Estimate> {
    if k == 0 || k >= n {
        return Err(NkError::invalid(format!("need 1 <= k < n, got n={n}, k={k}")));
    }
    if samples == 0 {
        return Err(NkError::invalid("number of samples must be at least 1"));
    }
    let m = run_chunked(
        samples,
        seed,
        || (NeighborhoodSample::zeroed(n, k), Vec::new()),
        |rng, (s, scratch)| {
            s.redraw(dist, rng, scratch);
            if check_direct(s) {
                1.0
            } else {
                0.0
            }
        },
    );
    Ok(Estimate::from_moments(&m, seed, Method::FatDirect))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SelftestReport {
    pub n: usize,
    pub k: usize,
    pub samples: u64,
    pub seed: u64,
    /// Samples where the cover algorithm and the event definition disagree.
    pub mismatches: u64,
    /// Samples where the algorithm answered TRUE but its witness is not a minimal cover.
    pub bad_witnesses: u64,
    pub true_count: u64,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.mismatches == 0 && self.bad_witnesses == 0
    }
}

/// Runs the cover algorithm and the direct check on the same random draws.
pub fn algorithm_selftest(n: usize, k: usize, samples: u64, seed: u64) -> Result<SelftestReport> {
    if k == 0 || k >= n {
        return Err(NkError::invalid(format!("need 1 <= k < n, got n={n}, k={k}")));
    }
    let chunks = samples.div_ceil(CHUNK_SIZE);
    let counts: Vec<[u64; 3]> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let len = CHUNK_SIZE.min(samples - c * CHUNK_SIZE);
            let mut rng = chunk_rng(seed, c);
            let mut s = NeighborhoodSample::zeroed(n, k);
            let mut scratch = Vec::new();
            let mut out = [0u64; 3];
            for _ in 0..len {
                s.redraw(DistributionKind::Uniform01, &mut rng, &mut scratch);
                let direct = check_direct(&s);
                let alg = run_cover_algorithm(&s);
                out[0] += (direct != alg.verdict) as u64;
                out[1] += (alg.verdict && !alg.sequence.is_minimal_cover()) as u64;
                out[2] += alg.verdict as u64;
            }
            out
        })
        .collect();
    let sum = |i: usize| counts.iter().map(|c| c[i]).sum();
    Ok(SelftestReport {
        n,
        k,
        samples,
        seed,
        mismatches: sum(0),
        bad_witnesses: sum(1),
        true_count: sum(2),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fattail::enumerate::enumerate_exact;

    #[test]
    fn verdict_stream_is_rank_invariant() {
        let (n, k) = (7, 2);
        let mut streams = Vec::new();
        for dist in DistributionKind::ALL {
            let mut rng = chunk_rng(21, 0);
            let mut s = NeighborhoodSample::zeroed(n, k);
            let mut scratch = Vec::new();
            let v: Vec<bool> = (0..2000)
                .map(|_| {
                    s.redraw(dist, &mut rng, &mut scratch);
                    check_direct(&s)
                })
                .collect();
            streams.push(v);
        }
        assert!(streams.windows(2).all(|w| w[0] == w[1]));
        let a = mc_p_fat_with(n, k, 50_000, 3, DistributionKind::Normal).unwrap();
        let b = mc_p_fat(n, k, 50_000, 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn matches_exact_at_n4_k1() {
        let exact = enumerate_exact(4, 1, None).unwrap().total_f64();
        let e = mc_p_fat(4, 1, 400_000, 17).unwrap();
        assert!(e.covers(exact, 4.0), "{e:?} vs {exact}");
    }

    #[test]
    fn selftest_passes() {
        let r = algorithm_selftest(9, 2, 20_000, 4).unwrap();
        assert!(r.passed(), "{r:?}");
        assert!(r.true_count > 0);
        assert!(algorithm_selftest(3, 3, 10, 1).is_err());
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(mc_p_fat(4, 0, 10, 1).is_err());
        assert!(mc_p_fat(4, 1, 0, 1).is_err());
    }
}
