//! Window-max events, the greedy checking algorithm, and covering sequences.
//!
//! Indices are 0-based throughout. Base value `Y_b` enters the events of rows
//! `b, b+1, ..., b+K` (mod N), so picking `b` in the algorithm settles the
//! window of rows `[b, b+K]`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde::Serialize;

use crate::error::{NkError, Result};
use crate::model::NeighborhoodSample;

/// `H'_j`: the largest base value in the window beats the largest mutant value of row `j`.
pub fn h_prime_event(sample: &NeighborhoodSample, j: usize) -> bool {
    let y = sample.y();
    let best_base = sample
        .window_indices(j)
        .map(|i| y[i])
        .fold(f64::NEG_INFINITY, f64::max);
    let best_mut = sample
        .y_mut_row(j)
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    best_base >= best_mut
}

/// `H' = ∩_j H'_j`.
pub fn check_direct(sample: &NeighborhoodSample) -> bool {
    (0..sample.n()).all(|j| h_prime_event(sample, j))
}

/// An ordered list of distinct window starts on the cycle `Z_N`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoverSequence {
    pub n: usize,
    pub k: usize,
    pub indices: Vec<usize>,
}

impl CoverSequence {
    pub fn new(n: usize, k: usize, indices: Vec<usize>) -> Result<Self> {
        if k == 0 || k >= n {
            return Err(NkError::invalid(format!("need 1 <= k < n, got n={n}, k={k}")));
        }
        let mut seen = vec![false; n];
        for &j in &indices {
            if j >= n {
                return Err(NkError::invalid(format!("index {j} out of range for n={n}")));
            }
            if seen[j] {
                return Err(NkError::invalid(format!("index {j} repeated")));
            }
            seen[j] = true;
        }
        Ok(CoverSequence { n, k, indices })
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// The uncovered positions after the first `s - 1` windows, in increasing order.
    pub fn missed(&self, s: usize) -> Result<Vec<usize>> {
        self.check_stage(s)?;
        let mut covered = vec![false; self.n];
        for &j in &self.indices[..s - 1] {
            for d in 0..=self.k {
                covered[(j + d) % self.n] = true;
            }
        }
        Ok((0..self.n).filter(|&i| !covered[i]).collect())
    }

    /// `M(s)`: the number of positions missed by the first `s - 1` windows.
    pub fn missed_count(&self, s: usize) -> Result<usize> {
        self.check_stage(s)?;
        Ok(missed_count_of(&self.indices[..s - 1], self.n, self.k))
    }

    /// Every position is covered by some window.
    pub fn covers(&self) -> bool {
        missed_count_of(&self.indices, self.n, self.k) == 0
    }

    /// Covers, and no proper initial segment does.
    pub fn is_minimal_cover(&self) -> bool {
        self.covers() && self.first_covering_prefix() == Some(self.len())
    }

    /// Length of the shortest covering initial segment, if any.
    pub fn first_covering_prefix(&self) -> Option<usize> {
        (1..=self.len()).find(|&l| missed_count_of(&self.indices[..l], self.n, self.k) == 0)
    }

    fn check_stage(&self, s: usize) -> Result<()> {
        if s == 0 || s > self.len() + 1 {
            return Err(NkError::invalid(format!(
                "stage {s} outside 1..={}",
                self.len() + 1
            )));
        }
        Ok(())
    }
}

/// Exact probability that the algorithm emits `seq` as its first picks without failing.
///
/// For a minimal cover this is the probability of the event that the algorithm
/// stops TRUE with exactly this witness.
pub fn sequence_probability(seq: &CoverSequence) -> BigRational {
    let (n, k) = (seq.n, seq.k);
    let mut p = BigRational::one();
    for s in 0..seq.len() {
        let m = missed_count_of(&seq.indices[..s], n, k);
        let remaining = n - s + (k + 1) * m;
        p /= BigRational::from_integer(BigInt::from(remaining));
    }
    p
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AlgorithmOutput {
    pub verdict: bool,
    pub sequence: CoverSequence,
}

#[derive(Clone, Copy)]
enum Var {
    Base(usize),
    Mutant(usize),
}

/// The greedy check: repeatedly take the largest remaining variable; a mutant
/// value means FALSE, a base value `Y_b` settles rows `b..=b+K` and leaves.
/// Stops TRUE once every row is settled.
///
/// Values are assumed distinct.
pub fn run_cover_algorithm(sample: &NeighborhoodSample) -> AlgorithmOutput {
    let (n, k) = (sample.n(), sample.k());
    let mut vars: Vec<(f64, Var)> = Vec::with_capacity(n * (k + 2));
    vars.extend(sample.y().iter().enumerate().map(|(b, &v)| (v, Var::Base(b))));
    for row in 0..n {
        vars.extend(sample.y_mut_row(row).iter().map(|&v| (v, Var::Mutant(row))));
    }
    vars.sort_unstable_by(|a, b| b.0.total_cmp(&a.0));

    let mut active = vec![true; n];
    let mut live_rows = n;
    let mut picks = Vec::new();
    let mut verdict = false;
    for &(_, var) in &vars {
        match var {
            Var::Mutant(row) => {
                if active[row] {
                    break;
                }
            }
            Var::Base(b) => {
                picks.push(b);
                for d in 0..=k {
                    let row = (b + d) % n;
                    if active[row] {
                        active[row] = false;
                        live_rows -= 1;
                    }
                }
                if live_rows == 0 {
                    verdict = true;
                    break;
                }
            }
        }
    }
    AlgorithmOutput {
        verdict,
        sequence: CoverSequence { n, k, indices: picks },
    }
}

// ---------------------------------------------------------------------------
// Arc arithmetic on the cycle, used by the enumerators. Short start lists are
// sorted on the stack; the enumerators call these in their innermost loops.

fn with_sorted<R>(starts: &[usize], f: impl FnOnce(&[usize]) -> R) -> R {
    const STACK: usize = 16;
    if starts.len() <= STACK {
        let mut buf = [0usize; STACK];
        let s = &mut buf[..starts.len()];
        s.copy_from_slice(starts);
        s.sort_unstable();
        f(s)
    } else {
        let mut v = starts.to_vec();
        v.sort_unstable();
        f(&v)
    }
}

/// Forward distance from the `i`-th sorted start to the next one.
#[inline]
fn gap_after(sorted: &[usize], i: usize, n: usize) -> usize {
    let m = sorted.len();
    if m == 1 {
        n
    } else {
        (sorted[(i + 1) % m] + n - sorted[i]) % n
    }
}

/// Number of positions not covered by the windows `[j, j+K]`, `j` in `starts`.
pub(crate) fn missed_count_of(starts: &[usize], n: usize, k: usize) -> usize {
    if starts.is_empty() {
        return n;
    }
    with_sorted(starts, |s| {
        (0..s.len())
            .map(|i| gap_after(s, i, n).saturating_sub(k + 1))
            .sum()
    })
}

/// Calls `f(first, len)` for each maximal uncovered arc.
fn for_each_missed_arc(starts: &[usize], n: usize, k: usize, mut f: impl FnMut(usize, usize)) {
    if starts.is_empty() {
        f(0, n);
        return;
    }
    with_sorted(starts, |s| {
        for i in 0..s.len() {
            let d = gap_after(s, i, n);
            if d > k + 1 {
                f((s[i] + k + 1) % n, d - k - 1);
            }
        }
    })
}

/// The maximal uncovered arcs as `(first position, length)`.
pub(crate) fn missed_arcs(starts: &[usize], n: usize, k: usize) -> Vec<(usize, usize)> {
    let mut arcs = Vec::new();
    for_each_missed_arc(starts, n, k, |a, len| arcs.push((a, len)));
    arcs
}

/// Lengths of the maximal covered arcs; empty if nothing or everything is covered.
fn covered_runs(starts: &[usize], n: usize, k: usize) -> Vec<usize> {
    with_sorted(starts, |s| {
        let m = s.len();
        let Some(first_break) = (0..m).find(|&i| gap_after(s, i, n) > k + 1) else {
            return Vec::new();
        };
        let mut runs = Vec::new();
        let mut len = 0;
        for step in 1..=m {
            let i = (first_break + step) % m;
            let d = gap_after(s, i, n);
            if d > k + 1 {
                runs.push(len + k + 1);
                len = 0;
            } else {
                len += d;
            }
        }
        runs
    })
}

/// Whether window `[j, j+K]` contains every position in the given arcs.
fn window_contains_arcs(j: usize, arcs: &[(usize, usize)], n: usize, k: usize) -> bool {
    arcs.iter().all(|&(a, len)| (a + n - j) % n + len <= k + 1)
}

/// Number of `j` not in `starts` such that `starts ∪ {j}` covers the cycle.
///
/// Assumes `starts` does not cover already.
pub(crate) fn count_completions(starts: &[usize], n: usize, k: usize) -> usize {
    let gap_len = n - k - 1;
    let arcs = missed_arcs(starts, n, k);
    debug_assert!(!arcs.is_empty());
    let total = if gap_len == 0 {
        n
    } else if starts.is_empty() {
        0
    } else {
        // the complement of [j, j+K] is an arc of gap_len positions that must
        // sit inside the covered set
        covered_runs(starts, n, k)
            .iter()
            .map(|&c| (c + 1).saturating_sub(gap_len))
            .sum()
    };
    let already = starts
        .iter()
        .filter(|&&j| window_contains_arcs(j, &arcs, n, k))
        .count();
    total - already
}

/// Upper bound on the probability that the algorithm, having emitted `starts`
/// without failing, eventually stops TRUE.
///
/// Each missed arc `I` needs its largest neighboring base value to beat its
/// mutant values; arcs are far enough apart for these events to be independent,
/// and the bound is the product of their exact probabilities.
pub(crate) fn continuation_bound(starts: &[usize], n: usize, k: usize) -> f64 {
    let mut q = 1.0;
    for_each_missed_arc(starts, n, k, |a, len| {
        let span = len + k;
        let bases = if span >= n {
            n - starts.len()
        } else {
            let lo = (a + n - k) % n;
            span - starts.iter().filter(|&&j| (j + n - lo) % n < span).count()
        };
        let mutants = len * (k + 1);
        q *= bases as f64 / (bases + mutants) as f64;
    });
    q
}
